#include "kacrice/cli.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "kacrice/config.hpp"
#include "kacrice/errors.hpp"
#include "kacrice/report.hpp"
#include "kacrice/rice.hpp"
#include "kacrice/rootcount.hpp"
#include "kacrice/theorem2.hpp"

namespace kacrice {

using nlohmann::json;

namespace {

struct Output {
  std::string text;
  int code = kExitOk;
};

json envelope(const std::string& command) { return {{"schema_version", kSchemaVersion}, {"command", command}}; }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string str(double x) { return format_number(x); }
std::string str(bool b) { return b ? "true" : "false"; }

std::string signal_variant(const RunConfig& cfg) {
  if (cfg.signal.is_array()) return "mixed";
  return cfg.signal.value("variant", "zero");
}

LogValue centered_log(const RunConfig& cfg, int m) {
  if (noise_family(cfg) == "shub-smale") {
    const auto model = build_noise(cfg, m);
    double lp = 0.0;
    for (int i = 0; i < m; ++i) lp += std::log(static_cast<double>(model.q(i).degree()));
    return LogValue::from_log(0.5 * lp);
  }
  return LogValue::from(centered_expectation(build_noise(cfg, m), cfg.quad).value);
}

Output cmd_expect(const RunConfig& cfg) {
  json rows = json::array();
  CsvTable csv({"m", "centered_EN_X", "abs_error", "std_error", "shub_smale_sqrt_prod_d"});
  for (int m : cfg.m) {
    const auto r = centered_expectation(build_noise(cfg, m), cfg.quad);
    const double closed = shub_smale_closed_form(cfg, m);
    json row = {{"m", m},
                {"centered_EN_X", json_number(r.value)},
                {"abs_error", json_number(r.abs_error)},
                {"std_error", json_number(r.std_error)},
                {"monte_carlo_E_h", r.monte_carlo}};
    row["shub_smale_sqrt_prod_d"] = closed >= 0 ? json_number(closed) : json(nullptr);
    rows.push_back(row);
    csv.add({std::to_string(m), str(r.value), str(r.abs_error), str(r.std_error), closed >= 0 ? str(closed) : ""});
  }
  if (cfg.format == "csv") return {csv.str()};
  json j = envelope("expect");
  j["rows"] = rows;
  return {dump(j)};
}

Output cmd_hyp(const RunConfig& cfg) {
  json rows = json::array();
  CsvTable csv({"m", "h1_holds", "h2_holds", "D_bar", "E_bar", "q_lower", "h_lower", "h_upper", "h1_discrepancy"});
  int code = kExitOk;
  for (int m : cfg.m) {
    const auto h = check_hypotheses(build_noise(cfg, m), cfg.hyp_grid.max, cfg.hyp_grid.n);
    if (!h.h1_holds || !h.h2_holds) code = kExitHypothesis;
    json row = to_json(h);
    row["m"] = m;
    rows.push_back(row);
    csv.add({std::to_string(m), str(h.h1_holds), str(h.h2_holds), str(h.D_bar()), str(h.E_bar()), str(h.q_lower),
             str(h.h_lower), str(h.h_upper), str(h.h1_discrepancy)});
  }
  if (cfg.format == "csv") return {csv.str(), code};
  json j = envelope("hyp");
  j["rows"] = rows;
  return {dump(j), code};
}

struct PerM {
  int m;
  HypothesisReport hyp;
  SnrReport snr;
};

// Hypotheses and SNR aggregates per m, with the list of failing hypotheses.
std::vector<PerM> analyse(const RunConfig& cfg, std::vector<std::string>& failures) {
  std::vector<PerM> out;
  for (int m : cfg.m) {
    const auto model = build_noise(cfg, m);
    const auto signal = build_signal(cfg, model);
    PerM p{m, check_hypotheses(model, cfg.hyp_grid.max, cfg.hyp_grid.n), snr_report(signal, model, cfg.r0, cfg.sup)};
    const std::string at = " at m = " + std::to_string(m);
    if (!p.hyp.h1_holds) failures.push_back("(H1) common h fails" + at);
    if (!p.hyp.h2_holds) failures.push_back("(H2) bounds on (1+u) q_i and (1+u) h fail" + at);
    if (!p.snr.h4_holds) failures.push_back("(H4) ell = " + str(p.snr.ell) + " is not positive" + at);
    out.push_back(std::move(p));
  }
  return out;
}

BoundConstants constants_for(const RunConfig& cfg, const std::vector<PerM>& per_m) {
  ConstantOptions opt;
  opt.worked_example = noise_family(cfg) == "shub-smale" && signal_variant(cfg) == "radial";
  const auto& last = per_m.back();
  const auto model = build_noise(cfg, last.m);
  const bool uniform = model.groups().size() == 1 && signal_is_uniform(cfg) && signal_variant(cfg) != "dense";
  double ell = std::numeric_limits<double>::infinity();
  for (const auto& p : per_m) ell = std::min(ell, p.snr.ell);
  // Identical equations give A_m = H^2 Harm(m) / m exactly; otherwise carry the supplied values.
  if (uniform) return compute_constants(last.hyp, ell, cfg.r0, uniform_aggregates(last.snr.H[0], last.snr.K[0]), opt);
  std::map<int, SnrReport> reports;
  for (const auto& p : per_m) reports[p.m] = p.snr;
  return compute_constants(last.hyp, reports, cfg.r0, opt);
}

void add_long(CsvTable& csv, const std::string& section, const json& obj, const std::string& m) {
  for (const auto& [k, v] : obj.items()) {
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i)
        csv.add({section, k + "[" + std::to_string(i) + "]", m, v[i].is_string() ? v[i].get<std::string>() : v[i].dump()});
    } else {
      csv.add({section, k, m, v.is_string() ? v.get<std::string>() : v.dump()});
    }
  }
}

Output cmd_bound(const RunConfig& cfg, bool with_chain) {
  std::vector<std::string> failures;
  const auto per_m = analyse(cfg, failures);
  json j = envelope(with_chain ? "bound" : "constants");
  j["r0"] = cfg.r0;
  CsvTable csv({"section", "name", "m", "value"});
  json rows = json::array();
  for (const auto& p : per_m) {
    json row = {{"m", p.m}, {"hypotheses", to_json(p.hyp)}, {"snr", to_json(p.snr)}};
    add_long(csv, "hypotheses", row["hypotheses"], std::to_string(p.m));
    add_long(csv, "snr", row["snr"], std::to_string(p.m));
    if (with_chain && p.hyp.h1_holds && p.hyp.h2_holds) {
      const auto model = build_noise(cfg, p.m);
      const auto chain = bound_chain(build_signal(cfg, model), model, p.snr, p.hyp, cfg.quad);
      row["bound_chain"] = to_json(chain);
      add_long(csv, "bound_chain", row["bound_chain"], std::to_string(p.m));
    }
    rows.push_back(row);
  }
  j["per_m"] = rows;
  j["failures"] = failures;
  for (const auto& f : failures) csv.add({"failures", "hypothesis", "", f});
  int code = kExitOk;
  if (failures.empty()) {
    const auto c = constants_for(cfg, per_m);
    j["constants"] = to_json(c);
    add_long(csv, "constants", j["constants"], "");
    if (with_chain) {
      SignalRoots roots = SignalRoots::none;
      int deg = 0;
      if (signal_variant(cfg) == "radial") roots = SignalRoots::continuum;
      if (signal_variant(cfg) == "separable") {
        roots = SignalRoots::product_of_degrees;
        deg = build_noise(cfg, per_m.back().m).q(0).degree();
      }
      const auto table = decay_table(c, [&](int m) { return centered_log(cfg, m); }, cfg.m, roots, deg);
      json t = json::array();
      for (const auto& r : table) {
        t.push_back(to_json(r));
        add_long(csv, "decay_table", t.back(), std::to_string(r.m));
      }
      j["decay_table"] = t;
    }
  } else {
    code = kExitHypothesis;
  }
  if (cfg.format == "csv") return {csv.str(), code};
  return {dump(j), code};
}

Output cmd_mc(const RunConfig& cfg) {
  json rows = json::array();
  CsvTable csv({"m", "mean", "std_error", "ci95_lower", "ci95_upper", "n", "seed", "method", "box_R", "warnings",
                "centered_EN_X", "exact_1d", "bound_s_m_H_m"});
  CsvTable counts({"m", "replicate", "seed", "count"});
  for (int m : cfg.m) {
    if (m > 2)
      throw ValidationError("Monte Carlo counting supports m <= 2; use 'expect' or 'bound' for m = " + std::to_string(m),
                            "m");
    const auto model = build_noise(cfg, m);
    const auto signal = build_signal(cfg, model);
    McOptions opt;
    opt.n = cfg.mc_n;
    opt.seed = cfg.seed;
    opt.threads = cfg.threads;
    opt.method_1d = cfg.method_1d;
    opt.box_R = cfg.box_R;
    const auto run = mc_expected_roots(model, signal, opt);
    const double centered = centered_expectation(model, cfg.quad).value;
    std::optional<double> exact;
    if (m == 1) exact = perturbed_exact_1d(signal[0], model.q(0), cfg.quad).value;
    std::optional<double> bound;
    const auto hyp = check_hypotheses(model, cfg.hyp_grid.max, cfg.hyp_grid.n);
    if (hyp.h1_holds && hyp.h2_holds) {
      const auto snr = snr_report(signal, model, cfg.r0, cfg.sup);
      bound = bound_chain(signal, model, snr, hyp, cfg.quad).final_bound;
    }
    json row = {{"m", m}, {"estimate", to_json(run.estimate)}, {"box_R", json_number(run.box_R)},
                {"warnings", run.warnings}, {"centered_EN_X", json_number(centered)}};
    row["exact_1d"] = exact ? json_number(*exact) : json(nullptr);
    row["bound_s_m_H_m"] = bound ? json_number(*bound) : json(nullptr);
    rows.push_back(row);
    const auto& e = run.estimate;
    csv.add({std::to_string(m), str(e.mean), str(e.std_error), str(e.lower()), str(e.upper()),
             std::to_string(e.n_replicates), std::to_string(e.seed), to_string(e.method), str(run.box_R),
             std::to_string(run.warnings), str(centered), exact ? str(*exact) : "", bound ? str(*bound) : ""});
    for (std::size_t r = 0; r < run.counts.size(); ++r)
      counts.add({std::to_string(m), std::to_string(r), std::to_string(run.seeds[r]), std::to_string(run.counts[r])});
  }
  if (!cfg.counts_out.empty()) {
    std::ofstream f(cfg.counts_out, std::ios::binary);
    if (!f) throw ValidationError("cannot open for writing", "mc.counts_out");
    f << counts.str();
  }
  if (cfg.format == "csv") return {csv.str()};
  json j = envelope("mc");
  j["rows"] = rows;
  return {dump(j)};
}

Output cmd_exact1d(const RunConfig& cfg) {
  if (cfg.m != std::vector<int>{1}) throw ValidationError("exact1d needs m = [1]", "m");
  const auto model = build_noise(cfg, 1);
  const auto signal = build_signal(cfg, model);
  const auto r = perturbed_exact_1d(signal[0], model.q(0), cfg.quad);
  const double centered = centered_expectation(model, cfg.quad).value;
  if (cfg.format == "csv") {
    CsvTable csv({"m", "lambda", "exact_1d", "abs_error", "centered_EN_X"});
    csv.add({"1", str(cfg.lambda), str(r.value), str(r.abs_error), str(centered)});
    return {csv.str()};
  }
  json j = envelope("exact1d");
  j["m"] = 1;
  j["lambda"] = json_number(cfg.lambda);
  j["exact_1d"] = json_number(r.value);
  j["abs_error"] = json_number(r.abs_error);
  j["centered_EN_X"] = json_number(centered);
  return {dump(j)};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Expected real roots of random polynomial systems: Rice formulas, perturbation bounds, Monte Carlo"};
  app.require_subcommand(1);
  std::string config_path, out_path, format;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::size_t> n;
  std::optional<double> r0;
  std::vector<int> m_list;
  bool emit = false;
  app.add_option("--config", config_path, "JSON config document")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "64-bit seed");
  app.add_option("--out", out_path, "write output to this file");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--m", m_list, "m values (ascending)");
  app.add_option("--n", n, "Monte Carlo replicates");
  app.add_option("--r0", r0, "radius r0");
  app.add_flag("--emit-config", emit, "print the resolved config and exit");
  const std::pair<const char*, const char*> subcommands[] = {
      {"expect", "centered expected root count per m"},
      {"bound", "hypotheses, bound chain, constants and decay table"},
      {"mc", "Monte Carlo root counting (m <= 2)"},
      {"exact1d", "exact perturbed expectation for m = 1"},
      {"constants", "theta, tau, m0 and C only"},
      {"hyp", "hypothesis report; exit 3 when a hypothesis fails"},
  };
  for (const auto& [name, help] : subcommands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    json doc = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      try {
        doc = json::parse(f);
      } catch (const json::parse_error& e) {
        throw ValidationError(std::string("invalid JSON: ") + e.what(), "--config");
      }
    }
    if (seed) doc["seed"] = *seed;
    if (threads) doc["threads"] = *threads;
    if (!format.empty()) doc["format"] = format;
    if (!out_path.empty()) doc["out"] = out_path;
    if (!m_list.empty()) doc["m"] = m_list;
    if (n) doc["mc"]["n"] = *n;
    if (r0) doc["r0"] = *r0;
    const RunConfig cfg = parse_config(doc);
    if (emit) {
      out << dump(to_json(cfg));
      return kExitOk;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    Output result;
    if (cmd == "expect") result = cmd_expect(cfg);
    else if (cmd == "hyp") result = cmd_hyp(cfg);
    else if (cmd == "bound") result = cmd_bound(cfg, true);
    else if (cmd == "constants") result = cmd_bound(cfg, false);
    else if (cmd == "mc") result = cmd_mc(cfg);
    else result = cmd_exact1d(cfg);
    if (cfg.out.empty()) {
      out << result.text;
    } else {
      std::ofstream f(cfg.out, std::ios::binary);
      if (!f) throw ValidationError("cannot open for writing", "out");
      f << result.text;
    }
    if (result.code == kExitHypothesis) err << "hypothesis check failed; see the failures field\n";
    return result.code;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const PreconditionError& e) {
    err << "hypothesis " << e.hypothesis() << " failed: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << " (achieved " << e.achieved_tolerance() << ")\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUnexpected;
  }
}

}  // namespace kacrice

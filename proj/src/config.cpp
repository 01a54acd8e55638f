#include "kacrice/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "kacrice/errors.hpp"

namespace kacrice {

using nlohmann::json;

namespace {

const json& field(const json& obj, const char* key) {
  static const json null_value;
  auto it = obj.find(key);
  return it == obj.end() ? null_value : *it;
}

template <class T>
T read(const json& obj, const char* key, const std::string& path, T fallback) {
  const json& v = field(obj, key);
  if (v.is_null()) return fallback;
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ValidationError("expected a number", path);
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() && !v.is_number_unsigned()) throw ValidationError("expected an integer", path);
      if constexpr (std::is_unsigned_v<T>)
        if (v.is_number_integer() && v.get<long long>() < 0) throw ValidationError("must be nonnegative", path);
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ValidationError("expected a string", path);
    }
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(e.what(), path);
  }
}

std::vector<double> read_reals(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ValidationError("expected a nonempty list of numbers", path);
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) throw ValidationError("expected a number", path + "[" + std::to_string(k) + "]");
    out.push_back(v[k].get<double>());
  }
  return out;
}

std::vector<int> read_ints(const json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError("expected a list of integers", path);
  std::vector<int> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number_integer()) throw ValidationError("expected an integer", path + "[" + std::to_string(k) + "]");
    out.push_back(v[k].get<int>());
  }
  return out;
}

// `path` is "noise" or "noise[i]" for per-equation lists.
CovarianceQ build_q(const json& noise, int i, int m, const std::string& path) {
  if (!noise.is_object()) throw ValidationError("expected an object", path);
  const std::string family = read<std::string>(noise, "family", path + ".family", "");
  try {
    if (family == "shub-smale") {
      if (!field(noise, "degrees").is_null()) {
        const auto deg = read_ints(field(noise, "degrees"), path + ".degrees");
        if (static_cast<int>(deg.size()) != m)
          throw ValidationError("has " + std::to_string(deg.size()) + " entries for m = " + std::to_string(m),
                                path + ".degrees");
        return shub_smale_q(deg[static_cast<std::size_t>(i)]);
      }
      return shub_smale_q(read<int>(noise, "d", path + ".d", 2));
    }
    if (family == "real-roots") return real_roots_q(read_reals(field(noise, "alphas"), path + ".alphas"));
    if (family == "power")
      return power_family_q(CovarianceQ(read_reals(field(noise, "base"), path + ".base")),
                            read<int>(noise, "l", path + ".l", 1));
    if (family == "coeffs") return CovarianceQ(read_reals(field(noise, "coeffs"), path + ".coeffs"));
  } catch (const DomainError& e) {
    throw ValidationError(e.what(), path);
  }
  throw ValidationError("unknown family '" + family + "' (shub-smale, real-roots, power, coeffs)", path + ".family");
}

SignalComponent build_component(const json& c, const std::string& path, int m, int noise_degree, int axis) {
  if (!c.is_object()) throw ValidationError("expected an object", path);
  const std::string variant = read<std::string>(c, "variant", path + ".variant", "zero");
  if (variant == "zero") return ZeroSignal{};
  if (variant == "radial") {
    const double r = read<double>(c, "r", path + ".r", 1.0);
    if (!(r > 0.0)) throw ValidationError("must be positive", path + ".r");
    const int d = read<int>(c, "d", path + ".d", noise_degree);
    if (d <= 0 || d % 2 != 0) throw ValidationError("must be even and positive", path + ".d");
    if (d != noise_degree)
      throw ValidationError("radial degree " + std::to_string(d) + " differs from the noise degree " +
                                std::to_string(noise_degree),
                            path + ".d");
    return RadialPower{d, r, 1.0};
  }
  if (variant == "separable") {
    auto T = read_reals(field(c, "T"), path + ".T");
    if (poly::degree(T) != noise_degree)
      throw ValidationError("T has degree " + std::to_string(poly::degree(T)) + ", noise degree is " +
                                std::to_string(noise_degree),
                            path + ".T");
    T.resize(static_cast<std::size_t>(noise_degree) + 1);
    return SeparableSignal{T, axis};
  }
  if (variant == "dense") {
    const json& terms = field(c, "terms");
    if (!terms.is_array()) throw ValidationError("expected a list of {j, c} terms", path + ".terms");
    int degree = 0;
    std::vector<std::pair<MultiIndex, double>> parsed;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      const std::string tp = path + ".terms[" + std::to_string(k) + "]";
      MultiIndex j{read_ints(field(terms[k], "j"), tp + ".j")};
      if (static_cast<int>(j.size()) != m) throw ValidationError("multi-index length differs from m", tp + ".j");
      if (std::any_of(j.e.begin(), j.e.end(), [](int x) { return x < 0; }))
        throw ValidationError("negative exponent", tp + ".j");
      degree = std::max(degree, j.norm());
      parsed.emplace_back(std::move(j), read<double>(terms[k], "c", tp + ".c", 0.0));
    }
    if (degree > noise_degree)
      throw ValidationError("dense degree " + std::to_string(degree) + " exceeds the noise degree", path + ".terms");
    SampledPolynomial p(m, degree);
    for (const auto& [j, v] : parsed) p.set(j, p.coefficient(j) + v);
    return DenseSignal{std::move(p)};
  }
  throw ValidationError("unknown variant '" + variant + "' (zero, radial, separable, dense)", path + ".variant");
}

CountMethod parse_method(const std::string& s) {
  if (s == "sturm") return CountMethod::sturm;
  if (s == "companion") return CountMethod::companion;
  throw ValidationError("must be sturm or companion", "mc.method");
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  RunConfig cfg;
  cfg.noise = field(doc, "noise");
  if (!cfg.noise.is_object() && !(cfg.noise.is_array() && !cfg.noise.empty()))
    throw ValidationError("required object, or a list with one object per equation", "noise");
  cfg.signal = field(doc, "signal").is_null() ? json{{"variant", "zero"}} : field(doc, "signal");

  if (!field(doc, "m").is_null()) {
    const json& mv = field(doc, "m");
    cfg.m = mv.is_number_integer() ? std::vector<int>{mv.get<int>()} : read_ints(mv, "m");
  }
  if (cfg.m.empty()) throw ValidationError("empty list", "m");
  for (std::size_t k = 0; k < cfg.m.size(); ++k) {
    if (cfg.m[k] < 1) throw ValidationError("must be >= 1", "m[" + std::to_string(k) + "]");
    if (k > 0 && cfg.m[k] <= cfg.m[k - 1]) throw ValidationError("must be strictly ascending", "m");
  }
  cfg.r0 = read<double>(doc, "r0", "r0", cfg.r0);
  if (!(cfg.r0 > 0.0)) throw ValidationError("must be positive", "r0");
  cfg.lambda = read<double>(doc, "lambda", "lambda", cfg.lambda);
  if (!std::isfinite(cfg.lambda)) throw ValidationError("must be finite", "lambda");

  const json& mc = field(doc, "mc");
  cfg.mc_n = read<std::size_t>(mc, "n", "mc.n", cfg.mc_n);
  cfg.det_samples = read<std::size_t>(mc, "det_samples", "mc.det_samples", cfg.det_samples);
  cfg.nodes = read<int>(mc, "nodes", "mc.nodes", cfg.nodes);
  cfg.method_1d = parse_method(read<std::string>(mc, "method", "mc.method", "sturm"));
  cfg.box_R = read<double>(mc, "box_R", "mc.box_R", cfg.box_R);
  cfg.counts_out = read<std::string>(mc, "counts_out", "mc.counts_out", "");
  if (cfg.mc_n < 100) throw ValidationError("must be >= 100", "mc.n");
  if (cfg.det_samples < 2) throw ValidationError("must be >= 2", "mc.det_samples");
  if (cfg.nodes < 1) throw ValidationError("must be >= 1", "mc.nodes");
  if (cfg.box_R < 0.0) throw ValidationError("must be >= 0", "mc.box_R");

  const json& q = field(doc, "quadrature");
  cfg.quad.abs_tol = read<double>(q, "abs_tol", "quadrature.abs_tol", cfg.quad.abs_tol);
  cfg.quad.rel_tol = read<double>(q, "rel_tol", "quadrature.rel_tol", cfg.quad.rel_tol);
  cfg.quad.max_subdivisions = read<int>(q, "max_subdivisions", "quadrature.max_subdivisions", cfg.quad.max_subdivisions);
  const std::string cutoff = read<std::string>(q, "cutoff", "quadrature.cutoff", "tail_mass");
  if (cutoff == "tail_mass") cfg.quad.cutoff = QuadratureSettings::Cutoff::tail_mass;
  else if (cutoff == "fixed") cfg.quad.cutoff = QuadratureSettings::Cutoff::fixed;
  else throw ValidationError("must be tail_mass or fixed", "quadrature.cutoff");
  cfg.quad.cutoff_radius = read<double>(q, "cutoff_radius", "quadrature.cutoff_radius", cfg.quad.cutoff_radius);
  cfg.quad.tail_mass = read<double>(q, "tail_mass", "quadrature.tail_mass", cfg.quad.tail_mass);
  cfg.quad.eh_samples = read<std::size_t>(q, "eh_samples", "quadrature.eh_samples", cfg.quad.eh_samples);

  const json& h = field(doc, "hyp");
  cfg.hyp_grid.max = read<double>(h, "grid_max", "hyp.grid_max", cfg.hyp_grid.max);
  cfg.hyp_grid.n = read<int>(h, "grid_n", "hyp.grid_n", cfg.hyp_grid.n);
  if (!(cfg.hyp_grid.max > 0.0) || cfg.hyp_grid.n < 2) throw ValidationError("grid needs max > 0 and n >= 2", "hyp");

  const json& s = field(doc, "sup");
  cfg.sup.rho_max = read<double>(s, "rho_max", "sup.rho_max", cfg.sup.rho_max);
  cfg.sup.grid_n = read<int>(s, "grid_n", "sup.grid_n", cfg.sup.grid_n);
  cfg.sup.angle_n = read<int>(s, "angle_n", "sup.angle_n", cfg.sup.angle_n);
  cfg.sup.starts = read<int>(s, "starts", "sup.starts", cfg.sup.starts);
  if (!(cfg.sup.rho_max > 0.0) || cfg.sup.grid_n < 8 || cfg.sup.angle_n < 3 || cfg.sup.starts < 1)
    throw ValidationError("needs rho_max > 0, grid_n >= 8, angle_n >= 3, starts >= 1", "sup");

  cfg.seed = read<std::uint64_t>(doc, "seed", "seed", cfg.seed);
  cfg.threads = read<unsigned>(doc, "threads", "threads", cfg.threads);
  if (cfg.threads == 0) throw ValidationError("must be >= 1", "threads");
  cfg.format = read<std::string>(doc, "format", "format", cfg.format);
  if (cfg.format != "json" && cfg.format != "csv") throw ValidationError("must be csv or json", "format");
  cfg.out = read<std::string>(doc, "out", "out", "");

  cfg.quad.seed = cfg.seed;
  cfg.quad.threads = cfg.threads;
  cfg.quad.validate();
  // Build once per m so errors surface at parse time with their field paths.
  for (int m : cfg.m) build_signal(cfg, build_noise(cfg, m));
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json j;
  j["noise"] = cfg.noise;
  j["signal"] = cfg.signal;
  j["m"] = cfg.m;
  j["r0"] = cfg.r0;
  j["lambda"] = cfg.lambda;
  j["mc"] = {{"n", cfg.mc_n},
             {"det_samples", cfg.det_samples},
             {"nodes", cfg.nodes},
             {"method", to_string(cfg.method_1d)},
             {"box_R", cfg.box_R},
             {"counts_out", cfg.counts_out}};
  j["quadrature"] = {{"abs_tol", cfg.quad.abs_tol},
                     {"rel_tol", cfg.quad.rel_tol},
                     {"max_subdivisions", cfg.quad.max_subdivisions},
                     {"cutoff", cfg.quad.cutoff == QuadratureSettings::Cutoff::fixed ? "fixed" : "tail_mass"},
                     {"cutoff_radius", cfg.quad.cutoff_radius},
                     {"tail_mass", cfg.quad.tail_mass},
                     {"eh_samples", cfg.quad.eh_samples}};
  j["hyp"] = {{"grid_max", cfg.hyp_grid.max}, {"grid_n", cfg.hyp_grid.n}};
  j["sup"] = {{"rho_max", cfg.sup.rho_max},
              {"grid_n", cfg.sup.grid_n},
              {"angle_n", cfg.sup.angle_n},
              {"starts", cfg.sup.starts}};
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["format"] = cfg.format;
  j["out"] = cfg.out;
  return j;
}

NoiseModel build_noise(const RunConfig& cfg, int m) {
  std::vector<CovarianceQ> qs;
  if (cfg.noise.is_array()) {
    if (static_cast<int>(cfg.noise.size()) != m)
      throw ValidationError("has " + std::to_string(cfg.noise.size()) + " entries for m = " + std::to_string(m), "noise");
    for (int i = 0; i < m; ++i)
      qs.push_back(build_q(cfg.noise[static_cast<std::size_t>(i)], i, m, "noise[" + std::to_string(i) + "]"));
  } else {
    for (int i = 0; i < m; ++i) qs.push_back(build_q(cfg.noise, i, m, "noise"));
  }
  return NoiseModel::from(std::move(qs));
}

SignalSpec build_signal(const RunConfig& cfg, const NoiseModel& noise) {
  const int m = noise.m();
  std::vector<SignalComponent> comps;
  if (cfg.signal.is_array()) {
    if (static_cast<int>(cfg.signal.size()) != m)
      throw ValidationError("has " + std::to_string(cfg.signal.size()) + " components for m = " + std::to_string(m),
                            "signal");
    for (int i = 0; i < m; ++i)
      comps.push_back(build_component(cfg.signal[static_cast<std::size_t>(i)], "signal[" + std::to_string(i) + "]", m,
                                      noise.q(i).degree(), i));
  } else {
    for (int i = 0; i < m; ++i) comps.push_back(build_component(cfg.signal, "signal", m, noise.q(i).degree(), i));
  }
  SignalSpec signal(m, std::move(comps));
  return cfg.lambda == 1.0 ? signal : signal.scaled(cfg.lambda);
}

std::string noise_family(const RunConfig& cfg) {
  if (!cfg.noise.is_array()) return read<std::string>(cfg.noise, "family", "noise.family", "");
  std::string family;
  for (std::size_t i = 0; i < cfg.noise.size(); ++i) {
    const auto f = read<std::string>(cfg.noise[i], "family", "noise[" + std::to_string(i) + "].family", "");
    if (i > 0 && f != family) return "mixed";
    family = f;
  }
  return family;
}

double shub_smale_closed_form(const RunConfig& cfg, int m) {
  if (noise_family(cfg) != "shub-smale") return -1.0;
  const auto model = build_noise(cfg, m);
  double log_p = 0.0;
  for (int i = 0; i < m; ++i) log_p += std::log(static_cast<double>(model.q(i).degree()));
  return std::exp(0.5 * log_p);
}

bool signal_is_uniform(const RunConfig& cfg) { return !cfg.signal.is_array(); }

}  // namespace kacrice

#include "kacrice/report.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace kacrice {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_log(LogValue v) {
  if (v.is_zero()) return "0";
  if (std::abs(v.log_magnitude) < 700.0) return format_number(v.value());
  const double l10 = v.log_magnitude / std::numbers::ln10;
  double e = std::floor(l10);
  double mant = std::pow(10.0, l10 - e);
  if (mant >= 10.0) mant /= 10.0, e += 1.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%.16fe%+.0f", v.sign < 0 ? "-" : "", mant, e);
  return buf;
}

json json_number(double x) { return std::isfinite(x) ? json(x) : json(format_number(x)); }

json json_log(LogValue v) {
  if (v.is_zero() || std::abs(v.log_magnitude) < 700.0) return json_number(v.is_zero() ? 0.0 : v.value());
  return format_log(v);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void CsvTable::add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k) out += ',';
      out += csv_field(r[k]);
    }
    out += "\r\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

namespace {

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

json optionals(const std::vector<std::optional<double>>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(x ? json_number(*x) : json(nullptr));
  return a;
}

}  // namespace

json to_json(const HypothesisReport& h) {
  return {{"D", numbers(h.D)},
          {"E", numbers(h.E)},
          {"D_bar", json_number(h.D_bar())},
          {"E_bar", json_number(h.E_bar())},
          {"q_lower", json_number(h.q_lower)},
          {"h_lower", json_number(h.h_lower)},
          {"h_upper", json_number(h.h_upper)},
          {"h1_holds", h.h1_holds},
          {"h1_discrepancy", json_number(h.h1_discrepancy)},
          {"h2_holds", h.h2_holds},
          {"named_D", optionals(h.named_D)},
          {"named_E", optionals(h.named_E)},
          {"named_bounds_valid", h.named_bounds_valid},
          {"grid", h.grid_description}};
}

json to_json(const SnrReport& r) {
  json hc = json::array(), kc = json::array();
  for (auto c : r.H_certainty) hc.push_back(to_string(c));
  for (auto c : r.K_certainty) kc.push_back(to_string(c));
  return {{"H", numbers(r.H)},
          {"K", numbers(r.K)},
          {"L_at_r0", numbers(r.L)},
          {"H_certainty", hc},
          {"K_certainty", kc},
          {"A_m", json_number(r.A_m)},
          {"B_m", json_number(r.B_m)},
          {"ell", json_number(r.ell)},
          {"ell_certified", r.ell_certified},
          {"r0", json_number(r.r0)},
          {"h3_holds", r.h3_holds ? json(*r.h3_holds) : json("advisory: decided by a sweep over m")},
          {"h4_holds", r.h4_holds}};
}

json to_json(const BoundChain& b) {
  return {{"m", b.m},
          {"r0", json_number(b.r0)},
          {"ell", json_number(b.ell)},
          {"s_m", json_number(b.s_m)},
          {"H_m", json_number(b.H_m)},
          {"H1_part", json_number(b.H1_part)},
          {"H2_part", json_number(b.H2_part)},
          {"H2_bound", json_number(b.H2_bound)},
          {"H1_bound", json_number(b.H1_bound)},
          {"H1_bound_closed", json_number(b.H1_bound_closed)},
          {"H1_bound_C1", json_number(b.H1_bound_C1)},
          {"C1", json_number(b.C1)},
          {"centered_EN_X", json_number(b.centered)},
          {"final_bound_s_m_H_m", json_number(b.final_bound)},
          {"std_error", json_number(b.std_error)},
          {"damping", to_string(b.damping)}};
}

json to_json(const BoundConstants& c) {
  json j = {{"r0", json_number(c.r0)},
            {"ell", json_number(c.ell)},
            {"theta1", json_number(c.theta1)},
            {"theta1_branch", c.theta1_radius_branch ? "r0/sqrt(r0^2+1/2)" : "exp(-ell/2)"},
            {"theta", json_number(c.theta)},
            {"F_bar", json_number(c.F_bar)},
            {"F_bar_ceiling", json_number(c.F_bar_ceiling)},
            {"tau", json_number(c.tau)},
            {"m0", c.m0},
            {"m0_half_pi", c.m0_half_pi},
            {"C", json_number(c.C)},
            {"C_sqrt_ratio", json_number(c.C_sqrt_ratio)},
            {"h_ratio", json_number(c.h_ratio)},
            {"aggregates_carried", c.aggregates_carried}};
  if (c.m0_worked) j["m0_worked"] = *c.m0_worked;
  if (c.theta_symbolic) j["theta_symbolic"] = *c.theta_symbolic;
  if (c.C_symbolic) j["C_symbolic"] = *c.C_symbolic;
  return j;
}

json to_json(const McEstimate& e) {
  return {{"mean", json_number(e.mean)},
          {"std_error", json_number(e.std_error)},
          {"ci95_lower", json_number(e.lower())},
          {"ci95_upper", json_number(e.upper())},
          {"n_replicates", e.n_replicates},
          {"seed", e.seed},
          {"method", to_string(e.method)}};
}

json to_json(const DecayRow& r) {
  json j = {{"m", r.m},
            {"centered_EN_X", json_log(r.centered)},
            {"bound_C_theta_m_EN_X", json_log(r.bound)},
            {"ratio_C_theta_m", json_log(r.ratio)},
            {"valid_m_ge_m0", r.valid}};
  if (r.n_p_infinite) j["N_P"] = "inf";
  else if (r.n_p) j["N_P"] = json_log(*r.n_p);
  return j;
}

}  // namespace kacrice

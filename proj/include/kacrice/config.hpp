#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "kacrice/covariance.hpp"
#include "kacrice/estimate.hpp"
#include "kacrice/rice.hpp"
#include "kacrice/signal.hpp"

namespace kacrice {

/// Fully resolved run configuration. Every field has a default, so an empty
/// document is valid apart from the required noise family.
struct RunConfig {
  nlohmann::json noise;   // {"family": "shub-smale" | "real-roots" | "power" | "coeffs", ...}, or one per equation
  nlohmann::json signal;  // one component object, or a list with one per equation
  std::vector<int> m{1};
  double r0 = 2.0;
  double lambda = 1.0;    // multiplies every signal component

  std::size_t mc_n = 1000;
  std::size_t det_samples = 10000;
  int nodes = 200;
  CountMethod method_1d = CountMethod::sturm;
  double box_R = 0.0;
  std::string counts_out;

  QuadratureSettings quad;
  UGrid hyp_grid;
  SupSettings sup;

  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string format = "json";
  std::string out;
};

/// Parses and validates a config document; errors carry the dotted field path.
RunConfig parse_config(const nlohmann::json& doc);

/// The resolved config as a document that parse_config maps back to the same values.
nlohmann::json to_json(const RunConfig& cfg);

/// Noise model with m equations.
NoiseModel build_noise(const RunConfig& cfg, int m);

/// Signal with m equations, scaled by lambda, against the given noise degrees.
SignalSpec build_signal(const RunConfig& cfg, const NoiseModel& noise);

/// Common family of every equation, or "mixed".
std::string noise_family(const RunConfig& cfg);

/// sqrt(prod d_i) when the noise is Shub-Smale, otherwise -1.
double shub_smale_closed_form(const RunConfig& cfg, int m);

/// True when one signal component object applies to every equation.
bool signal_is_uniform(const RunConfig& cfg);

}  // namespace kacrice

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ltvatt/discrete_filter.hpp"
#include "ltvatt/monte_carlo.hpp"
#include "ltvatt/sim.hpp"

namespace ltvatt::app {

struct ObservabilitySettings {
  double delta = 5.0;                 // window length, s
  std::optional<double> mu;           // defaults to default_mu(delta)
  double quadrature_rate_hz = 1000.0;
  bool cross_product_completion = true;
};

/// One scenario: trajectory, sensor suite and the filter that consumes it.
struct ScenarioConfig {
  std::string label;
  std::uint64_t seed = 1;
  TrajectoryProfile trajectory;
  SensorSuite suite;
  FilterConfig filter;
  bool explicit_initial_estimate = false;  // filter.initial_rotation / initial_state given
  Vec3 initial_error = Vec3::Zero();       // axis-angle offset from the true R(0) otherwise
  ObservabilitySettings observability;
  MonteCarloSpec montecarlo;
};

/// A root config holds one scenario or a list of them under "cases".
struct RootConfig {
  std::filesystem::path path;
  std::uint64_t hash = 0;  // FNV-1a over the bytes of every file read
  std::uint64_t seed = 1;
  std::vector<ScenarioConfig> cases;
};

RootConfig load_config(const std::filesystem::path& path);

/// Parses config text; `base_dir` resolves relative case paths.
RootConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                        std::string_view source_name = "<config>");

/// Filter settings with channel tunings derived from the suite, then
/// overridden by any explicit per-channel entries.
FilterConfig resolved_filter(const ScenarioConfig& scenario);

GainMode parse_gain_mode(std::string_view text);

}  // namespace ltvatt::app

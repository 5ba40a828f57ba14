#include "ltvatt/app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include "ltvatt/app/config.hpp"
#include "ltvatt/errors.hpp"
#include "ltvatt/monte_carlo.hpp"
#include "ltvatt/observability.hpp"
#include "ltvatt/sensor_log.hpp"
#include "ltvatt/sim.hpp"
#include "ltvatt/so3.hpp"

namespace ltvatt::app {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

RootConfig load_with_overrides(const CommandOptions& options) {
  if (options.config.empty()) throw ConfigError("--config is required");
  RootConfig root = load_config(options.config);
  if (options.seed) {
    root.seed = *options.seed;
    for (auto& c : root.cases) {
      c.seed = *options.seed;
      c.montecarlo.seed = *options.seed;
    }
  }
  for (auto& c : root.cases) {
    if (options.mode) c.filter.mode = *options.mode;
    if (options.no_reset) c.filter.reset_enabled = false;
    if (options.delta) c.observability.delta = *options.delta;
    if (options.mu) c.observability.mu = *options.mu;
  }
  return root;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("cannot create output directory '" + dir.string() + "'");
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  return os;
}

std::ifstream open_input(const std::filesystem::path& path, const char* what) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError(std::string("cannot read ") + what + " '" + path.string() + "'");
  return is;
}

const ScenarioConfig& single_case(const RootConfig& root, const char* command) {
  if (root.cases.size() != 1) {
    throw ConfigError(std::string(command) + " takes a single-scenario config (found " +
                      std::to_string(root.cases.size()) + " cases)");
  }
  return root.cases.front();
}

// ZOH lookup into a uniformly sampled rotation history.
RotationFn sampled_rotation(std::shared_ptr<const TruthTable> table) {
  return [table](double t) -> Mat3 {
    const double pos = (t - table->t0) * table->rate_hz;
    const auto last = static_cast<long long>(table->rotations.size()) - 1;
    const long long idx = std::clamp(static_cast<long long>(std::floor(pos + 1e-9)), 0LL, last);
    return table->rotations[static_cast<std::size_t>(idx)];
  };
}

double record_rate(std::span<const TruthRecord> truth, double fallback) {
  if (truth.size() < 2) return fallback;
  const double dt = (truth.back().t - truth.front().t) / static_cast<double>(truth.size() - 1);
  return dt > 0.0 ? 1.0 / dt : fallback;
}

std::string fmt(double v) { return format_double(v); }

std::string fixed(double v, int digits) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

double percentile_of(std::vector<double> values, double p) { return percentile(values, p); }

// Virtual triads b = r_i x r_j for every pair of full-triad vector sensors.
std::vector<ScalarChannel> cross_product_triads(const SensorSuite& suite) {
  std::vector<const SensorSpec*> full;
  for (const auto& s : suite.sensors) {
    if (s.kind == SensorKind::vector && s.axes.size() == 3) full.push_back(&s);
  }
  std::vector<ScalarChannel> out;
  for (std::size_t i = 0; i < full.size(); ++i) {
    for (std::size_t j = i + 1; j < full.size(); ++j) {
      const VectorProvider r1 = full[i]->reference;
      const VectorProvider r2 = full[j]->reference;
      const auto cross = VectorProvider::function([r1, r2](double t) { return Vec3(r1(t).cross(r2(t))); });
      auto triad = vector_channels(full[i]->name + "_x_" + full[j]->name, cross, std::array{1, 2, 3}, 0.0,
                                   std::min(full[i]->rate_hz, full[j]->rate_hz));
      out.insert(out.end(), triad.begin(), triad.end());
    }
  }
  return out;
}

int simulate_case(const ScenarioConfig& sc, const std::filesystem::path& dir, std::uint64_t hash, std::ostream& out) {
  ensure_dir(dir);
  const auto truth = integrate_truth(sc.trajectory);
  const auto log = synthesize_measurements(truth, sc.suite, sc.trajectory.imu_rate_hz, sc.seed);
  const FileStamp stamp{hash, sc.seed};
  {
    auto os = open_output(dir / "sensors.csv");
    write_sensor_log(os, log, stamp);
  }
  {
    auto os = open_output(dir / "truth.csv");
    write_truth_log(os, truth, stamp);
  }
  std::size_t gyro_records = 0;
  for (const auto& m : log) gyro_records += is_gyro(m) ? 1 : 0;
  out << "scenario " << sc.label << ": duration " << fmt(sc.trajectory.duration) << " s, IMU "
      << fmt(sc.trajectory.imu_rate_hz) << " Hz (" << gyro_records << " gyro records), seed " << sc.seed << "\n";
  const auto rotation = sampled_rotation(std::make_shared<TruthTable>(make_truth_table(truth, sc.trajectory.imu_rate_hz)));
  for (const auto& ch : suite_channels(sc.suite, rotation)) {
    const auto n = std::count_if(log.begin(), log.end(), [&](const ScalarMeasurement& m) { return m.channel_id == ch.id; });
    out << "  channel " << ch.id << ": " << fmt(ch.rate_hz) << " Hz, variance " << fmt(ch.noise_variance) << ", "
        << n << " records\n";
  }
  out << "  wrote " << (dir / "sensors.csv").string() << " and " << (dir / "truth.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int simulate(const CommandOptions& options, std::ostream& out) {
  const RootConfig root = load_with_overrides(options);
  if (root.cases.size() == 1) return simulate_case(root.cases.front(), options.out, root.hash, out);
  for (const auto& sc : root.cases) simulate_case(sc, options.out / sc.label, root.hash, out);
  return kExitOk;
}

int estimate(const CommandOptions& options, std::ostream& out) {
  const RootConfig root = load_with_overrides(options);
  const ScenarioConfig& sc = single_case(root, "estimate");
  if (options.log.empty()) throw ConfigError("estimate needs --log <sensor log CSV>");

  std::vector<ScalarMeasurement> log;
  {
    auto is = open_input(options.log, "sensor log");
    log = read_sensor_log(is);
  }
  std::vector<TruthRecord> truth;
  std::optional<TruthTable> table;
  if (!options.truth.empty()) {
    auto is = open_input(options.truth, "truth log");
    truth = read_truth_log(is);
    if (truth.empty()) throw DataError("truth log has no records");
    TruthTable t;
    t.t0 = truth.front().t;
    t.rate_hz = record_rate(truth, sc.trajectory.imu_rate_hz);
    for (const auto& r : truth) t.rotations.push_back(r.rotation);
    table = std::move(t);
  }

  FilterConfig config = resolved_filter(sc);
  if (!sc.explicit_initial_estimate) {
    const Mat3 base = truth.empty() ? Mat3::Identity() : truth.front().rotation;
    config.initial_rotation = base * exp_so3(sc.initial_error);
  }
  const FilterRun run = run_discrete_filter(log, config, table ? &*table : nullptr);

  ensure_dir(options.out);
  const auto path = options.out / "estimate.csv";
  {
    auto os = open_output(path);
    os << stamp_line({root.hash, sc.seed}) << "\n";
    os << "t_sec,r11,r12,r13,r21,r22,r23,r31,r32,r33" << (table ? ",err_rad" : "") << ",trace_P\n";
    for (const auto& s : run.samples) {
      os << fmt(s.t);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) os << ',' << fmt(s.rotation(i, j));
      }
      if (table) os << ',' << (std::isnan(s.err_rad) ? std::string() : fmt(s.err_rad));
      os << ',' << fmt(s.trace_P) << "\n";
    }
  }

  out << "estimate " << sc.label << ": " << run.samples.size() << " steps, " << run.update_steps
      << " correction steps, mode " << (config.mode == GainMode::riccati ? "riccati" : "fixed_gain")
      << (config.reset_enabled ? "" : ", reset disabled") << "\n";
  for (const auto& w : run.warnings) out << "  warning: " << w << "\n";
  if (table && !run.samples.empty()) {
    std::vector<double> tail;
    for (std::size_t k = run.samples.size() / 2; k < run.samples.size(); ++k) {
      if (!std::isnan(run.samples[k].err_rad)) tail.push_back(run.samples[k].err_rad);
    }
    const double initial = run.samples.front().err_rad;
    const double final = run.samples.back().err_rad;
    out << "  error: initial " << fixed(initial * kRadToDeg, 4) << " deg, final " << fixed(final * kRadToDeg, 4)
        << " deg";
    if (!tail.empty()) {
      out << ", second half p50 " << fixed(percentile_of(tail, 50) * kRadToDeg, 4) << " deg, p95 "
          << fixed(percentile_of(tail, 95) * kRadToDeg, 4) << " deg";
    }
    out << "\n";
  }
  out << "  wrote " << path.string() << "\n";
  return kExitOk;
}

int check_observability(const CommandOptions& options, std::ostream& out) {
  const RootConfig root = load_with_overrides(options);
  ensure_dir(options.out);
  bool any_unobservable = false;

  for (const auto& sc : root.cases) {
    const ObservabilitySettings& obs = sc.observability;
    std::vector<TruthRecord> truth;
    std::string source;
    if (options.omega_source.empty() || options.omega_source == "profile") {
      truth = integrate_truth(sc.trajectory);
      source = "configured trajectory";
    } else {
      auto is = open_input(options.omega_source, "rotation history");
      truth = read_truth_log(is);
      if (truth.size() < 2) throw DataError("rotation history needs at least two records");
      source = options.omega_source;
    }
    auto table = std::make_shared<TruthTable>();
    table->t0 = truth.front().t;
    table->rate_hz = record_rate(truth, sc.trajectory.imu_rate_hz);
    for (const auto& r : truth) table->rotations.push_back(r.rotation);
    const RotationFn rotation = sampled_rotation(table);
    const double t_begin = truth.front().t;
    const double t_end = truth.back().t + 1.0 / table->rate_hz;

    auto channels = suite_channels(sc.suite, rotation);
    const std::size_t measured = channels.size();
    if (obs.cross_product_completion) {
      auto extra = cross_product_triads(sc.suite);
      channels.insert(channels.end(), extra.begin(), extra.end());
    }
    if (channels.empty()) throw ConfigError("scenario '" + sc.label + "' has no measurement channels");
    const auto triads = triad_references(channels);

    const double delta = obs.delta;
    const double mu = obs.mu.value_or(default_mu(delta));
    const double samples = delta * obs.quadrature_rate_hz;
    const int n_steps = std::max(10, static_cast<int>(std::llround(samples)));
    std::vector<std::string> warnings;
    double slowest = std::numeric_limits<double>::infinity();
    for (const auto& ch : channels) slowest = std::min(slowest, ch.rate_hz);
    if (samples < 10.0 || delta * slowest < 1.0) {
      warnings.push_back("window of " + fmt(delta) + " s is too short: it spans " + fixed(samples, 1) +
                         " quadrature samples and " + fixed(delta * slowest, 2) +
                         " periods of the slowest channel; the Gramian shrinks with the window");
    }
    if (delta > t_end - t_begin + 1e-12) {
      throw ConfigError("observability window (" + fmt(delta) + " s) is longer than the trajectory");
    }

    const auto path = options.out / ("observability_" + sc.label + ".csv");
    auto os = open_output(path);
    os << stamp_line({root.hash, sc.seed}) << "\n";
    os << "t0,t1,min_eig,mu,verdict,pe_min_eig,pe_verdict";
    for (int i = 1; i <= 9; ++i) os << ",lambda" << i;
    os << "\n";

    std::size_t counts[3] = {0, 0, 0};
    double worst = std::numeric_limits<double>::infinity();
    std::optional<GramianReport> worst_report;
    const auto n_windows = static_cast<std::size_t>(std::floor((t_end - t_begin) / delta + 1e-9));
    for (std::size_t w = 0; w < n_windows; ++w) {
      const double t0 = t_begin + static_cast<double>(w) * delta;
      const GramianReport rep = observability_gramian(rotation, channels, t0, delta, n_steps, mu);
      ++counts[static_cast<int>(rep.verdict)];
      if (rep.min_eig < worst) {
        worst = rep.min_eig;
        worst_report = rep;
      }
      os << fmt(rep.t0) << ',' << fmt(rep.t1) << ',' << fmt(rep.min_eig) << ',' << fmt(rep.mu) << ','
         << to_string(rep.verdict);
      if (triads) {
        const PEReport pe = excitation_gramian(*triads, t0, delta, n_steps, mu);
        os << ',' << fmt(pe.min_eig) << ',' << to_string(pe.verdict);
      } else {
        os << ",,";
      }
      for (int i = 0; i < 9; ++i) os << ',' << fmt(rep.eigenvalues(i));
      os << "\n";
    }
    any_unobservable = any_unobservable || counts[static_cast<int>(Verdict::unobservable)] > 0;

    out << "observability " << sc.label << " (R(t) from " << source << "): " << measured << " measured channels";
    if (channels.size() > measured) out << " + " << channels.size() - measured << " cross-product channels";
    out << ", delta " << fmt(delta) << " s, mu " << fmt(mu) << "\n";
    out << "  windows: " << n_windows << " (observable " << counts[0] << ", marginal " << counts[1]
        << ", unobservable " << counts[2] << "), smallest min_eig " << fmt(worst) << "\n";
    if (worst_report && !worst_report->null_directions.empty()) {
      out << "  weakest window [" << fmt(worst_report->t0) << ", " << fmt(worst_report->t1) << "] has "
          << worst_report->null_directions.size() << " eigen-directions below mu\n";
    }
    for (const auto& w : warnings) out << "  warning: " << w << "\n";
    out << "  wrote " << path.string() << "\n";
  }
  return any_unobservable ? kExitObservabilityGate : kExitOk;
}

int montecarlo(const CommandOptions& options, std::ostream& out) {
  const RootConfig root = load_with_overrides(options);
  ensure_dir(options.out);
  std::ostringstream summary;
  summary << "case,runs,converged,diverged,mean_final_deg,max_final_deg,post_transient_band_deg\n";

  for (const auto& sc : root.cases) {
    MonteCarloSpec spec = sc.montecarlo;
    if (options.runs) spec.n_runs = *options.runs;
    spec.jobs = std::max(1u, options.jobs);
    const FilterConfig config = resolved_filter(sc);
    const MonteCarloResult res = run_monte_carlo(spec, sc.suite, sc.trajectory, config);
    const FileStamp stamp{root.hash, spec.seed};

    {
      auto os = open_output(options.out / (sc.label + "_aggregate.csv"));
      os << stamp_line(stamp) << "\nt_sec,mean_err_rad";
      for (double p : res.percentile_levels) os << ",p" << fmt(p) << "_err_rad";
      os << "\n";
      for (std::size_t k = 0; k < res.t.size(); ++k) {
        os << fmt(res.t[k]) << ',' << fmt(res.mean[k]);
        for (const auto& curve : res.percentile_curves) os << ',' << fmt(curve[k]);
        os << "\n";
      }
    }
    {
      auto os = open_output(options.out / (sc.label + "_runs.csv"));
      os << stamp_line(stamp) << "\nrun,seed,initial_err_rad,final_err_rad,convergence_time_s,converged,diverged\n";
      for (const auto& r : res.runs) {
        os << r.index << ',' << r.seed << ',' << fmt(r.initial_error) << ',' << fmt(r.final_error) << ','
           << (r.convergence_time ? fmt(*r.convergence_time) : std::string()) << ',' << (r.converged ? 1 : 0) << ','
           << (r.diverged ? 1 : 0) << "\n";
      }
    }
    if (options.per_run) {
      for (const auto& r : res.runs) {
        auto os = open_output(options.out / (sc.label + "_run" + std::to_string(r.index) + ".csv"));
        os << stamp_line({root.hash, r.seed}) << "\nt_sec,err_rad\n";
        for (std::size_t k = 0; k < r.error.size() && k < res.t.size(); ++k) {
          os << fmt(res.t[k]) << ',' << fmt(r.error[k]) << "\n";
        }
      }
    }

    double mean_final = 0.0;
    double max_final = 0.0;
    for (const auto& r : res.runs) {
      mean_final += r.final_error / static_cast<double>(res.runs.size());
      max_final = std::max(max_final, r.final_error);
    }
    // Band averaged over the last two thirds of the run; only meaningful with two levels.
    double band = 0.0;
    if (res.percentile_curves.size() >= 2 && !res.t.empty()) {
      const std::size_t from = res.t.size() / 3;
      for (std::size_t k = from; k < res.t.size(); ++k) band += res.percentile_curves.back()[k] - res.percentile_curves.front()[k];
      band /= static_cast<double>(res.t.size() - from);
    }
    summary << sc.label << ',' << res.runs.size() << ',' << res.converged_count << ',' << res.diverged_count << ','
            << fixed(mean_final * kRadToDeg, 4) << ',' << fixed(max_final * kRadToDeg, 4) << ','
            << fixed(band * kRadToDeg, 4) << "\n";
    for (const auto& w : res.warnings) out << "warning (" << sc.label << "): " << w << "\n";
  }

  {
    auto os = open_output(options.out / "summary.csv");
    os << stamp_line({root.hash, root.seed}) << "\n" << summary.str();
  }
  out << summary.str();
  return kExitOk;
}

int run_command(const std::string& name, const CommandOptions& options, std::ostream& out, std::ostream& err) {
  try {
    if (name == "simulate") return simulate(options, out);
    if (name == "estimate") return estimate(options, out);
    if (name == "check-observability") return check_observability(options, out);
    if (name == "montecarlo") return montecarlo(options, out);
    err << "error: unknown command '" << name << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace ltvatt::app

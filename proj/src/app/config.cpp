#include "ltvatt/app/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "ltvatt/errors.hpp"
#include "ltvatt/sensor_log.hpp"
#include "ltvatt/so3.hpp"

namespace ltvatt::app {
namespace {

using nlohmann::json;

constexpr double kDeg = std::numbers::pi / 180.0;

// Schema walker: every accessor knows its JSON pointer so diagnostics can
// name the offending key.
class Node {
 public:
  Node(const json& value, std::string pointer) : value_(value), pointer_(std::move(pointer)) {}

  const json& raw() const { return value_; }
  const std::string& pointer() const { return pointer_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError((pointer_.empty() ? std::string("/") : pointer_) + ": " + what);
  }

  bool has(std::string_view key) const { return value_.is_object() && value_.contains(key); }

  Node at(std::string_view key) const {
    if (!has(key)) fail("missing key '" + std::string(key) + "'");
    return Node(value_.at(key), pointer_ + "/" + std::string(key));
  }

  Node at(std::size_t index) const { return Node(value_.at(index), pointer_ + "/" + std::to_string(index)); }

  void expect_object(std::initializer_list<std::string_view> allowed) const {
    if (!value_.is_object()) fail("expected an object");
    const std::set<std::string_view> keys(allowed);
    for (const auto& [k, v] : value_.items()) {
      if (!keys.contains(k)) fail("unknown key '" + k + "'");
    }
  }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be positive");
    return v;
  }

  double nonnegative() const {
    const double v = number();
    if (v < 0.0) fail("must be nonnegative");
    return v;
  }

  std::uint64_t unsigned_integer() const {
    if (!value_.is_number_unsigned() && !(value_.is_number_integer() && value_.get<std::int64_t>() >= 0)) {
      fail("expected a nonnegative integer");
    }
    return value_.get<std::uint64_t>();
  }

  bool boolean() const {
    if (!value_.is_boolean()) fail("expected true or false");
    return value_.get<bool>();
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  std::size_t array_size() const {
    if (!value_.is_array()) fail("expected an array");
    return value_.size();
  }

  Vec3 vec3() const {
    if (array_size() != 3) fail("expected an array of 3 numbers");
    return Vec3(at(std::size_t{0}).number(), at(std::size_t{1}).number(), at(std::size_t{2}).number());
  }

  Mat3 mat3() const {
    if (array_size() != 3) fail("expected a 3x3 array");
    Mat3 m;
    for (std::size_t i = 0; i < 3; ++i) m.row(static_cast<Eigen::Index>(i)) = at(i).vec3().transpose();
    return m;
  }

  // Scalar s -> s I3, [a, b, c] -> diag, [[...]] -> full (must be symmetric PSD).
  Mat3 covariance() const {
    Mat3 m;
    if (value_.is_number()) {
      m = nonnegative() * Mat3::Identity();
    } else if (array_size() == 3 && value_.at(0).is_number()) {
      m = vec3().asDiagonal();
    } else {
      m = mat3();
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) fail("covariance must be symmetric");
    if (Eigen::SelfAdjointEigenSolver<Mat3>(m).eigenvalues().minCoeff() < -1e-15) fail("covariance must be PSD");
    return m;
  }

  Mat3 rotation() const {
    if (value_.is_string()) {
      const std::string s = string();
      if (s == "identity") return Mat3::Identity();
      if (s == "reference") return reference_profile().initial_rotation;
      fail("unknown rotation '" + s + "' (use identity, reference, a 3x3 matrix or {\"axis_angle\": [...]})");
    }
    if (value_.is_object()) {
      if (has("axis_angle_deg")) {
        expect_object({"axis_angle_deg"});
        return exp_so3((at("axis_angle_deg").vec3() * kDeg).eval());
      }
      expect_object({"axis_angle"});
      return exp_so3(at("axis_angle").vec3());
    }
    const Mat3 m = mat3();
    if (!is_rotation(m, 1e-9)) fail("matrix is not a rotation");
    return m;
  }

  HarmonicVector harmonic() const {
    expect_object({"offset", "amplitude", "frequency", "phase"});
    HarmonicVector h;
    if (has("offset")) h.offset = at("offset").vec3();
    if (has("amplitude")) h.amplitude = at("amplitude").vec3();
    if (has("frequency")) h.frequency = at("frequency").vec3();
    if (has("phase")) h.phase = at("phase").vec3();
    return h;
  }

  // Constant [x, y, z], a named reference, or {"harmonic": {...}}.
  VectorProvider provider() const {
    if (value_.is_string()) {
      const std::string s = string();
      if (s == "gravity") return VectorProvider::constant(accelerometer_reference());
      if (s == "magnetic") return VectorProvider::constant(magnetometer_reference());
      fail("unknown vector '" + s + "' (use gravity, magnetic, [x, y, z] or {\"harmonic\": {...}})");
    }
    if (value_.is_object()) {
      expect_object({"harmonic"});
      return VectorProvider::function(at("harmonic").harmonic());
    }
    return VectorProvider::constant(vec3());
  }

 private:
  const json& value_;
  std::string pointer_;
};

json parse_json(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports "at line L, column C" in its message.
    throw ConfigError(std::string(source) + ": " + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TrajectoryProfile parse_trajectory(const Node& n) {
  n.expect_object({"duration", "imu_rate_hz", "omega", "initial_rotation"});
  TrajectoryProfile p = reference_profile();
  if (n.has("duration")) p.duration = n.at("duration").positive();
  if (n.has("imu_rate_hz")) p.imu_rate_hz = n.at("imu_rate_hz").positive();
  if (n.has("omega")) {
    const Node w = n.at("omega");
    if (w.raw().is_string()) {
      if (w.string() != "reference") w.fail("unknown omega profile (use reference, [x, y, z] or a harmonic object)");
    } else if (w.raw().is_object()) {
      p.omega = w.harmonic();
    } else {
      const Vec3 c = w.vec3();
      p.omega = [c](double) { return c; };
    }
  }
  if (n.has("initial_rotation")) p.initial_rotation = n.at("initial_rotation").rotation();
  if (std::llround(p.duration * p.imu_rate_hz) < 1) n.fail("duration is shorter than one IMU period");
  return p;
}

SensorKind parse_kind(const Node& n) {
  const std::string s = n.string();
  if (s == "vector") return SensorKind::vector;
  if (s == "tilt") return SensorKind::tilt;
  if (s == "pitot") return SensorKind::pitot;
  if (s == "landmark") return SensorKind::landmark;
  n.fail("unknown sensor type '" + s + "' (vector, tilt, pitot, landmark)");
}

SensorSpec parse_sensor(const Node& n) {
  n.expect_object({"name", "type", "reference", "axes", "rate_hz", "variance", "direction", "velocity", "point_a",
                   "point_b"});
  SensorSpec s;
  s.name = n.at("name").string();
  if (s.name.empty() || s.name == kGyroChannelId) n.at("name").fail("sensor name must be nonempty and not 'gyro'");
  if (s.name.find(',') != std::string::npos) n.at("name").fail("sensor name must not contain ','");
  s.kind = parse_kind(n.at("type"));
  s.rate_hz = n.at("rate_hz").positive();
  s.variance = n.has("variance") ? n.at("variance").nonnegative() : 0.0;
  switch (s.kind) {
    case SensorKind::vector: {
      s.reference = n.at("reference").provider();
      if (n.has("axes")) {
        const Node axes = n.at("axes");
        s.axes.clear();
        for (std::size_t i = 0; i < axes.array_size(); ++i) {
          const auto axis = axes.at(i).unsigned_integer();
          if (axis < 1 || axis > 3) axes.at(i).fail("axis must be 1, 2 or 3");
          s.axes.push_back(static_cast<int>(axis));
        }
        if (s.axes.empty()) axes.fail("at least one axis is required");
        if (std::set<int>(s.axes.begin(), s.axes.end()).size() != s.axes.size()) axes.fail("duplicate axis");
      }
      break;
    }
    case SensorKind::tilt: break;
    case SensorKind::pitot:
      s.probe_direction = n.at("direction").vec3();
      if (s.probe_direction.norm() == 0.0) n.at("direction").fail("probe direction must be nonzero");
      s.reference = n.at("velocity").provider();
      break;
    case SensorKind::landmark:
      s.landmark_a = n.at("point_a").vec3();
      s.landmark_b = n.at("point_b").vec3();
      if ((s.landmark_a - s.landmark_b).norm() == 0.0) n.fail("landmark points must differ");
      break;
  }
  return s;
}

void parse_filter(const Node& n, ScenarioConfig& sc) {
  n.expect_object({"mode", "p0_scale", "m_floor", "q_floor", "reset_enabled", "fixed_gain", "gyro_cov",
                   "initial_rotation", "initial_state", "initial_error_deg", "channels"});
  FilterConfig& f = sc.filter;
  if (n.has("mode")) {
    try {
      f.mode = parse_gain_mode(n.at("mode").string());
    } catch (const ConfigError& e) {
      n.at("mode").fail(e.what());
    }
  }
  if (n.has("p0_scale")) f.p0_scale = n.at("p0_scale").positive();
  if (n.has("m_floor")) f.m_floor = n.at("m_floor").nonnegative();
  if (n.has("q_floor")) f.q_floor = n.at("q_floor").nonnegative();
  if (n.has("reset_enabled")) f.reset_enabled = n.at("reset_enabled").boolean();
  if (n.has("fixed_gain")) f.fixed_gain = n.at("fixed_gain").positive();
  if (n.has("gyro_cov")) f.gyro_cov = n.at("gyro_cov").covariance();
  if (n.has("initial_rotation")) {
    f.initial_rotation = n.at("initial_rotation").rotation();
    sc.explicit_initial_estimate = true;
  }
  if (n.has("initial_state")) {
    const Node s = n.at("initial_state");
    if (s.array_size() != 9) s.fail("expected 9 numbers");
    Vec9 x;
    for (std::size_t i = 0; i < 9; ++i) x(static_cast<Eigen::Index>(i)) = s.at(i).number();
    f.initial_state = x;
    sc.explicit_initial_estimate = true;
  }
  if (n.has("initial_error_deg")) sc.initial_error = n.at("initial_error_deg").vec3() * kDeg;
  if (n.has("channels")) {
    const Node chans = n.at("channels");
    if (!chans.raw().is_object()) chans.fail("expected an object keyed by channel id");
    for (const auto& [id, v] : chans.raw().items()) {
      const Node c = chans.at(id);
      c.expect_object({"variance", "rate_hz"});
      f.channels[id] = {c.at("variance").nonnegative(), c.at("rate_hz").positive()};
    }
  }
}

void parse_observability(const Node& n, ObservabilitySettings& o) {
  n.expect_object({"delta", "mu", "quadrature_rate_hz", "cross_product_completion"});
  if (n.has("delta")) o.delta = n.at("delta").positive();
  if (n.has("mu")) o.mu = n.at("mu").positive();
  if (n.has("quadrature_rate_hz")) o.quadrature_rate_hz = n.at("quadrature_rate_hz").positive();
  if (n.has("cross_product_completion")) o.cross_product_completion = n.at("cross_product_completion").boolean();
}

void parse_montecarlo(const Node& n, MonteCarloSpec& m) {
  n.expect_object({"n_runs", "mean_axis_error_deg", "sigma_deg", "percentiles", "jobs", "noise", "converged_final_deg",
                   "converged_ratio", "final_window_s"});
  if (n.has("n_runs")) {
    const auto runs = n.at("n_runs").unsigned_integer();
    if (runs < 1) n.at("n_runs").fail("must be at least 1");
    m.n_runs = static_cast<int>(runs);
  }
  if (n.has("mean_axis_error_deg")) m.mean_axis_error_rad = n.at("mean_axis_error_deg").nonnegative() * kDeg;
  if (n.has("sigma_deg")) m.sigma_rad = n.at("sigma_deg").nonnegative() * kDeg;
  if (n.has("percentiles")) {
    const Node p = n.at("percentiles");
    m.percentiles.clear();
    for (std::size_t i = 0; i < p.array_size(); ++i) {
      const double v = p.at(i).number();
      if (!(v > 0.0 && v < 100.0)) p.at(i).fail("percentiles must lie in (0, 100)");
      m.percentiles.push_back(v);
    }
  }
  if (n.has("jobs")) m.jobs = static_cast<unsigned>(std::max<std::uint64_t>(1, n.at("jobs").unsigned_integer()));
  if (n.has("noise")) m.noise_enabled = n.at("noise").boolean();
  if (n.has("converged_final_deg")) m.converged_final_rad = n.at("converged_final_deg").positive() * kDeg;
  if (n.has("converged_ratio")) m.converged_ratio = n.at("converged_ratio").positive();
  if (n.has("final_window_s")) m.final_window_s = n.at("final_window_s").positive();
}

ScenarioConfig parse_scenario(const Node& n, std::uint64_t root_seed) {
  n.expect_object({"label", "seed", "trajectory", "gyro", "sensors", "filter", "observability", "montecarlo"});
  ScenarioConfig sc;
  sc.label = n.has("label") ? n.at("label").string() : "scenario";
  sc.seed = n.has("seed") ? n.at("seed").unsigned_integer() : root_seed;
  sc.trajectory = n.has("trajectory") ? parse_trajectory(n.at("trajectory")) : reference_profile();
  sc.suite.label = sc.label;
  if (n.has("gyro")) {
    const Node g = n.at("gyro");
    g.expect_object({"cov"});
    sc.suite.gyro_cov = g.at("cov").covariance();
  }
  const Node sensors = n.at("sensors");
  std::set<std::string> names;
  for (std::size_t i = 0; i < sensors.array_size(); ++i) {
    SensorSpec s = parse_sensor(sensors.at(i));
    if (!names.insert(s.name).second) sensors.at(i).fail("duplicate sensor name '" + s.name + "'");
    if (std::abs(std::round(sc.trajectory.imu_rate_hz / s.rate_hz) - sc.trajectory.imu_rate_hz / s.rate_hz) > 1e-9 ||
        s.rate_hz > sc.trajectory.imu_rate_hz) {
      sensors.at(i).at("rate_hz").fail("sensor rate must divide the IMU rate");
    }
    sc.suite.sensors.push_back(std::move(s));
  }
  sc.filter.gyro_cov = sc.suite.gyro_cov;
  if (n.has("filter")) parse_filter(n.at("filter"), sc);
  sc.filter.imu_rate_hz = sc.trajectory.imu_rate_hz;
  if (n.has("observability")) parse_observability(n.at("observability"), sc.observability);
  if (n.has("montecarlo")) parse_montecarlo(n.at("montecarlo"), sc.montecarlo);
  sc.montecarlo.seed = sc.seed;
  return sc;
}

}  // namespace

GainMode parse_gain_mode(std::string_view text) {
  if (text == "riccati") return GainMode::riccati;
  if (text == "fixed_gain") return GainMode::fixed_gain;
  throw ConfigError("unknown mode '" + std::string(text) + "' (riccati or fixed_gain)");
}

RootConfig parse_config(std::string_view text, const std::filesystem::path& base_dir, std::string_view source_name) {
  RootConfig root;
  std::string hashed(text);
  json doc = parse_json(text, source_name);
  if (!doc.is_object()) throw ConfigError(std::string(source_name) + ": top level must be an object");
  const Node top(doc, "");
  if (doc.contains("seed")) root.seed = top.at("seed").unsigned_integer();

  if (!doc.contains("cases")) {
    root.cases.push_back(parse_scenario(top, root.seed));
  } else {
    // Every case inherits the root's keys and overrides them (JSON merge patch).
    json defaults = doc;
    defaults.erase("cases");
    defaults.erase("label");
    const Node cases = top.at("cases");
    if (cases.array_size() == 0) cases.fail("at least one case is required");
    for (std::size_t i = 0; i < cases.array_size(); ++i) {
      const Node entry = cases.at(i);
      json case_doc;
      std::string where = source_name.empty() ? std::string() : std::string(source_name);
      if (entry.raw().is_string()) {
        const std::filesystem::path p = base_dir / entry.string();
        const std::string case_text = read_file(p);
        hashed += case_text;
        case_doc = parse_json(case_text, p.string());
        where = p.string();
      } else if (entry.raw().is_object()) {
        case_doc = entry.raw();
      } else {
        entry.fail("expected a file path or an inline scenario object");
      }
      json merged = defaults;
      merged.merge_patch(case_doc);
      try {
        root.cases.push_back(parse_scenario(Node(merged, ""), root.seed));
      } catch (const ConfigError& e) {
        throw ConfigError(where + " (case " + std::to_string(i) + ") " + e.what());
      }
    }
  }
  root.hash = fnv1a64(hashed);
  return root;
}

RootConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  RootConfig root;
  try {
    root = parse_config(text, path.parent_path(), path.string());
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw ConfigError(path.string() + ": " + msg);
  }
  root.path = path;
  return root;
}

FilterConfig resolved_filter(const ScenarioConfig& scenario) {
  FilterConfig f = scenario.filter;
  auto tuning = suite_tuning(scenario.suite);
  for (const auto& [id, t] : scenario.filter.channels) tuning[id] = t;
  f.channels = std::move(tuning);
  return f;
}

}  // namespace ltvatt::app

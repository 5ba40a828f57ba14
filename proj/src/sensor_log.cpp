#include "ltvatt/sensor_log.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "ltvatt/errors.hpp"

namespace ltvatt {

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view field, std::size_t line_no) {
  field = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw DataError("line " + std::to_string(line_no) + ": cannot parse number '" + std::string(field) + "'");
  }
  return v;
}

// Reads up to and including the mandatory header; returns the line number reached.
std::size_t expect_header(std::istream& is, std::string_view header) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (view != header) {
      throw DataError("line " + std::to_string(line_no) + ": expected header '" + std::string(header) + "'");
    }
    return line_no;
  }
  throw DataError("missing header row '" + std::string(header) + "'");
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string stamp_line(const FileStamp& stamp) {
  std::ostringstream os;
  os << "# ltvatt " << kToolVersion << " config_hash=" << std::hex << stamp.config_hash << std::dec
     << " seed=" << stamp.seed;
  return os.str();
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

bool is_gyro(const ScalarMeasurement& m) { return m.channel_id == kGyroChannelId; }

ScalarMeasurement gyro_record(double t, const Vec3& omega) {
  return {std::string(kGyroChannelId), t, 0.0, omega, Vec3::Zero()};
}

void write_sensor_log(std::ostream& os, std::span<const ScalarMeasurement> records, const FileStamp& stamp) {
  os << stamp_line(stamp) << '\n' << kSensorLogHeader << '\n';
  for (const auto& r : records) {
    os << format_double(r.t) << ',' << r.channel_id << ',' << format_double(r.y);
    for (int i = 0; i < 3; ++i) os << ',' << format_double(r.a(i));
    for (int i = 0; i < 3; ++i) os << ',' << format_double(r.b(i));
    os << '\n';
  }
}

std::vector<ScalarMeasurement> read_sensor_log(std::istream& is) {
  std::size_t line_no = expect_header(is, kSensorLogHeader);
  std::vector<ScalarMeasurement> out;
  std::string line;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split_csv(view);
    if (fields.size() != 9) {
      throw DataError("line " + std::to_string(line_no) + ": expected 9 fields, found " +
                      std::to_string(fields.size()));
    }
    ScalarMeasurement m;
    m.t = parse_double(fields[0], line_no);
    m.channel_id = std::string(trim(fields[1]));
    if (m.channel_id.empty()) throw DataError("line " + std::to_string(line_no) + ": empty channel_id");
    m.y = parse_double(fields[2], line_no);
    for (int i = 0; i < 3; ++i) m.a(i) = parse_double(fields[3 + static_cast<std::size_t>(i)], line_no);
    for (int i = 0; i < 3; ++i) m.b(i) = parse_double(fields[6 + static_cast<std::size_t>(i)], line_no);
    out.push_back(std::move(m));
  }
  return out;
}

void write_truth_log(std::ostream& os, std::span<const TruthRecord> records, const FileStamp& stamp) {
  os << stamp_line(stamp) << '\n' << kTruthHeader << '\n';
  for (const auto& r : records) {
    os << format_double(r.t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) os << ',' << format_double(r.rotation(i, j));
    for (int i = 0; i < 3; ++i) os << ',' << format_double(r.omega(i));
    os << '\n';
  }
}

std::vector<TruthRecord> read_truth_log(std::istream& is) {
  std::size_t line_no = expect_header(is, kTruthHeader);
  std::vector<TruthRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split_csv(view);
    if (fields.size() != 13) {
      throw DataError("line " + std::to_string(line_no) + ": expected 13 fields, found " +
                      std::to_string(fields.size()));
    }
    TruthRecord r;
    r.t = parse_double(fields[0], line_no);
    for (int k = 0; k < 9; ++k) r.rotation(k / 3, k % 3) = parse_double(fields[1 + static_cast<std::size_t>(k)], line_no);
    for (int i = 0; i < 3; ++i) r.omega(i) = parse_double(fields[10 + static_cast<std::size_t>(i)], line_no);
    out.push_back(r);
  }
  return out;
}

}  // namespace ltvatt

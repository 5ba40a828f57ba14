#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ltvatt/measurements.hpp"
#include "ltvatt/types.hpp"

namespace ltvatt {

inline constexpr std::string_view kToolVersion = "0.1.0";
// Reserved channel id for gyro samples; omega travels in (a_x, a_y, a_z).
inline constexpr std::string_view kGyroChannelId = "gyro";

inline constexpr std::string_view kSensorLogHeader = "t_sec,channel_id,y,a_x,a_y,a_z,b_x,b_y,b_z";
inline constexpr std::string_view kTruthHeader = "t_sec,r11,r12,r13,r21,r22,r23,r31,r32,r33,w_x,w_y,w_z";

/// Provenance line written as "# ltvatt <version> config_hash=<hex> seed=<n>".
struct FileStamp {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string stamp_line(const FileStamp& stamp);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

struct TruthRecord {
  double t = 0.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 omega = Vec3::Zero();
};

bool is_gyro(const ScalarMeasurement& m);
ScalarMeasurement gyro_record(double t, const Vec3& omega);

void write_sensor_log(std::ostream& os, std::span<const ScalarMeasurement> records, const FileStamp& stamp);
/// Parses the CSV log. Lines starting with '#' are skipped; the column header
/// is mandatory. Throws DataError naming the 1-based line on malformed rows.
std::vector<ScalarMeasurement> read_sensor_log(std::istream& is);

void write_truth_log(std::ostream& os, std::span<const TruthRecord> records, const FileStamp& stamp);
std::vector<TruthRecord> read_truth_log(std::istream& is);

}  // namespace ltvatt

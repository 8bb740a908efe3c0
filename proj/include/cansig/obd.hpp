#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cansig/trace.hpp"

namespace cansig {

// Mode 01 PIDs this toolkit decodes (SAE J1979).
namespace pid {
inline constexpr std::uint8_t kEngineLoad = 0x04;
inline constexpr std::uint8_t kEngineSpeed = 0x0C;
inline constexpr std::uint8_t kVehicleSpeed = 0x0D;
inline constexpr std::uint8_t kThrottlePosition = 0x11;
inline constexpr std::uint8_t kRelativeThrottle = 0x45;
inline constexpr std::uint8_t kThrottleB = 0x47;
inline constexpr std::uint8_t kThrottleC = 0x48;
inline constexpr std::uint8_t kPedalD = 0x49;
inline constexpr std::uint8_t kPedalE = 0x4A;
inline constexpr std::uint8_t kPedalF = 0x4B;
}  // namespace pid

inline constexpr std::uint32_t kObdRequestId = 0x7DF;
inline constexpr std::uint32_t kObdResponseFirst = 0x7E8;
inline constexpr std::uint32_t kObdResponseLast = 0x7EF;
inline constexpr std::uint8_t kMode01Response = 0x41;

namespace labels {
inline constexpr const char* kEngineSpeed = "EngineSpeed";
inline constexpr const char* kVehicleSpeed = "VehicleSpeed";
inline constexpr const char* kThrottlePosition = "ThrottlePosition";
inline constexpr const char* kEngineLoad = "EngineLoad";
}  // namespace labels

bool is_supported_pid(std::uint8_t pid) noexcept;
// Number of data bytes the PID's formula consumes.
std::size_t pid_data_length(std::uint8_t pid);
// Descriptive label a PID's samples are grouped under.
std::string pid_label(std::uint8_t pid);

// Ids used by OBD-II requests and responses (11-bit 0x7DF, 0x7E0-0x7EF and
// the 29-bit 0x18DA/0x18DB ranges). They are not vehicle signals.
bool is_diagnostic_id(std::uint32_t key) noexcept;

// Physical value of a mode 01 response: 0x0C (256A+B)/4 rpm, 0x0D A km/h,
// the load and throttle PIDs A*100/255 %. Throws UnsupportedPid / ShortData.
double decode_pid(std::uint8_t pid, std::span<const std::uint8_t> data);

// Inverse of decode_pid, rounding to the nearest representable value and
// clamping to the PID's range.
std::vector<std::uint8_t> encode_pid(std::uint8_t pid, double value);

struct ObdSample {
  double timestamp = 0.0;
  std::uint8_t pid = 0;
  double value = 0.0;
};

struct ObdExtraction {
  std::vector<ObdSample> samples;
  std::size_t malformed = 0;
  std::size_t unsupported = 0;
  std::vector<std::string> warnings;
};

// Reads single-frame mode 01 positive responses ([len, 0x41, pid, data...])
// from ids 0x7E8-0x7EF.
ObdExtraction extract_obd_responses(const RawTrace& trace);

struct Template {
  std::string label;
  std::vector<double> timestamps;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
};

using TemplateSet = std::map<std::string, Template>;

// Groups samples by descriptive label and sorts each series by time. Labels
// with fewer than two samples are dropped with a warning.
TemplateSet build_templates(std::span<const ObdSample> samples,
                            std::vector<std::string>* warnings = nullptr);

// Template CSV: header `timestamp,label,value`, one sample per row.
TemplateSet parse_template_csv(std::string_view text, std::vector<std::string>* warnings = nullptr);
std::string write_template_csv(const TemplateSet& templates);

}  // namespace cansig

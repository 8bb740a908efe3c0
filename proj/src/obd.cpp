#include "cansig/obd.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "text_util.hpp"

namespace cansig {

bool is_supported_pid(std::uint8_t p) noexcept {
  switch (p) {
    case pid::kEngineLoad:
    case pid::kEngineSpeed:
    case pid::kVehicleSpeed:
    case pid::kThrottlePosition:
    case pid::kRelativeThrottle:
    case pid::kThrottleB:
    case pid::kThrottleC:
    case pid::kPedalD:
    case pid::kPedalE:
    case pid::kPedalF:
      return true;
    default:
      return false;
  }
}

namespace {

std::string pid_text(std::uint8_t p) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%02X", p);
  return buf;
}

void require_supported(std::uint8_t p) {
  if (!is_supported_pid(p)) throw Error(ErrorCode::UnsupportedPid, "unsupported PID " + pid_text(p));
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::size_t pid_data_length(std::uint8_t p) {
  require_supported(p);
  return p == pid::kEngineSpeed ? 2 : 1;
}

std::string pid_label(std::uint8_t p) {
  require_supported(p);
  switch (p) {
    case pid::kEngineSpeed: return labels::kEngineSpeed;
    case pid::kVehicleSpeed: return labels::kVehicleSpeed;
    case pid::kEngineLoad: return labels::kEngineLoad;
    default: return labels::kThrottlePosition;
  }
}

bool is_diagnostic_id(std::uint32_t key) noexcept {
  if (key & kExtendedFlag) {
    const std::uint32_t id = key & ~kExtendedFlag;
    return (id & 0xFFFF0000u) == 0x18DA0000u || (id & 0xFFFF0000u) == 0x18DB0000u;
  }
  return key == kObdRequestId || (key >= 0x7E0 && key <= kObdResponseLast);
}

double decode_pid(std::uint8_t p, std::span<const std::uint8_t> data) {
  const std::size_t need = pid_data_length(p);
  if (data.size() < need) {
    throw Error(ErrorCode::ShortData, "PID " + pid_text(p) + " needs " + std::to_string(need) +
                                          " data bytes, got " + std::to_string(data.size()));
  }
  switch (p) {
    case pid::kEngineSpeed: return (256.0 * data[0] + data[1]) / 4.0;
    case pid::kVehicleSpeed: return data[0];
    default: return data[0] * 100.0 / 255.0;
  }
}

std::vector<std::uint8_t> encode_pid(std::uint8_t p, double value) {
  require_supported(p);
  const auto clamp_round = [](double v, double hi) {
    return static_cast<unsigned>(std::clamp(std::round(v), 0.0, hi));
  };
  switch (p) {
    case pid::kEngineSpeed: {
      const unsigned raw = clamp_round(value * 4.0, 65535.0);
      return {static_cast<std::uint8_t>(raw >> 8), static_cast<std::uint8_t>(raw & 0xFF)};
    }
    case pid::kVehicleSpeed:
      return {static_cast<std::uint8_t>(clamp_round(value, 255.0))};
    default:
      return {static_cast<std::uint8_t>(clamp_round(value * 255.0 / 100.0, 255.0))};
  }
}

ObdExtraction extract_obd_responses(const RawTrace& trace) {
  ObdExtraction out;
  for (const auto& f : trace.frames) {
    if (f.extended || f.can_id < kObdResponseFirst || f.can_id > kObdResponseLast) continue;
    const auto payload = f.payload();
    if (payload.size() < 3 || payload[0] < 2 || payload[0] + 1u > payload.size()) {
      ++out.malformed;
      continue;
    }
    if (payload[1] != kMode01Response) continue;  // other modes are not templates
    const std::uint8_t p = payload[2];
    if (!is_supported_pid(p)) {
      ++out.unsupported;
      out.warnings.push_back("skipping unsupported PID " + pid_text(p));
      continue;
    }
    const auto data = payload.subspan(3, payload[0] - 2u);
    if (data.size() < pid_data_length(p)) {
      ++out.malformed;
      continue;
    }
    out.samples.push_back({f.timestamp, p, decode_pid(p, data)});
  }
  return out;
}

namespace {

TemplateSet finish_templates(std::map<std::string, std::vector<std::pair<double, double>>> series,
                             std::vector<std::string>* warnings) {
  TemplateSet out;
  for (auto& [label, points] : series) {
    std::stable_sort(points.begin(), points.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    Template t;
    t.label = label;
    for (const auto& [ts, v] : points) {
      if (!t.timestamps.empty() && ts <= t.timestamps.back()) continue;
      t.timestamps.push_back(ts);
      t.values.push_back(v);
    }
    if (t.size() < 2) {
      if (warnings) warnings->push_back("template " + label + " has fewer than two samples; dropped");
      continue;
    }
    out.emplace(label, std::move(t));
  }
  return out;
}

}  // namespace

TemplateSet build_templates(std::span<const ObdSample> samples, std::vector<std::string>* warnings) {
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (const auto& s : samples) series[pid_label(s.pid)].emplace_back(s.timestamp, s.value);
  return finish_templates(std::move(series), warnings);
}

TemplateSet parse_template_csv(std::string_view content, std::vector<std::string>* warnings) {
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  bool header = true;
  std::size_t ts_col = 0, label_col = 1, value_col = 2;
  text::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (text::trim(line).empty()) return;
    const auto cells = text::split(line, ',');
    if (header) {
      header = false;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto name = text::lower(text::unquote(cells[i]));
        if (name == "timestamp") ts_col = i;
        if (name == "label") label_col = i;
        if (name == "value") value_col = i;
      }
      return;
    }
    const auto ts = cells.size() > ts_col ? text::parse_number<double>(cells[ts_col]) : std::nullopt;
    const auto v = cells.size() > value_col ? text::parse_number<double>(cells[value_col]) : std::nullopt;
    if (!ts || !v || cells.size() <= label_col) {
      if (warnings) warnings->push_back("template CSV line " + std::to_string(line_no) + " malformed");
      return;
    }
    series[std::string(text::unquote(cells[label_col]))].emplace_back(*ts, *v);
  });
  return finish_templates(std::move(series), warnings);
}

std::string write_template_csv(const TemplateSet& templates) {
  std::string out = "timestamp,label,value\n";
  for (const auto& [label, t] : templates) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      out += format_double(t.timestamps[i]);
      out += ',';
      out += label;
      out += ',';
      out += format_double(t.values[i]);
      out += '\n';
    }
  }
  return out;
}

}  // namespace cansig

#include "cansig/trace.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "text_util.hpp"

namespace cansig {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::TooFewFrames: return "TooFewFrames";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NoActiveSignals: return "NoActiveSignals";
    case ErrorCode::UnsupportedPid: return "UnsupportedPid";
    case ErrorCode::ShortData: return "ShortData";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::NoTemplates: return "NoTemplates";
    case ErrorCode::NoDefinitions: return "NoDefinitions";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::MissingAnnotations: return "MissingAnnotations";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
  }
  return "Unknown";
}

namespace {

struct IdText {
  std::uint32_t id;
  bool extended;
};

// Three hex digits or fewer is a standard id, longer is extended.
std::optional<IdText> parse_id(std::string_view s) {
  s = text::trim(s);
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
  if (s.empty() || s.size() > 8) return std::nullopt;
  const auto v = text::parse_hex(s);
  if (!v) return std::nullopt;
  const bool extended = s.size() > 3;
  if (!extended && *v > kMaxStandardId) return std::nullopt;
  if (*v > kMaxExtendedId) return std::nullopt;
  return IdText{static_cast<std::uint32_t>(*v), extended};
}

bool fill_payload(Frame& f, const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() > kMaxPayload) return false;
  f.dlc = static_cast<std::uint8_t>(bytes.size());
  std::copy(bytes.begin(), bytes.end(), f.data.begin());
  return true;
}

std::optional<Frame> parse_candump_line(std::string_view line, std::string& why) {
  line = text::trim(line);
  if (line.empty() || line.front() != '(') {
    why = "expected '(timestamp)'";
    return std::nullopt;
  }
  const auto close = line.find(')');
  if (close == std::string_view::npos) {
    why = "unterminated timestamp";
    return std::nullopt;
  }
  const auto ts = text::parse_number<double>(line.substr(1, close - 1));
  if (!ts || *ts < 0.0) {
    why = "bad timestamp";
    return std::nullopt;
  }
  auto rest = text::trim(line.substr(close + 1));
  const auto space = rest.find_first_of(" \t");
  if (space == std::string_view::npos) {
    why = "missing interface or frame";
    return std::nullopt;
  }
  rest = text::trim(rest.substr(space + 1));
  const auto hash = rest.find('#');
  if (hash == std::string_view::npos) {
    why = "missing '#'";
    return std::nullopt;
  }
  const auto id = parse_id(rest.substr(0, hash));
  if (!id) {
    why = "bad CAN id";
    return std::nullopt;
  }
  const auto data_text = rest.substr(hash + 1);
  if (!data_text.empty() && (data_text.front() == '#' || data_text.front() == 'R' ||
                             data_text.front() == 'r')) {
    why = "remote and CAN-FD frames are not supported";
    return std::nullopt;
  }
  const auto bytes = text::parse_hex_bytes(data_text);
  Frame f;
  f.timestamp = *ts;
  f.can_id = id->id;
  f.extended = id->extended;
  if (!bytes || !fill_payload(f, *bytes)) {
    why = "bad payload";
    return std::nullopt;
  }
  return f;
}

}  // namespace

RawTrace parse_candump(std::string_view text_in, std::string source) {
  RawTrace out;
  out.source = std::move(source);
  text::for_each_line(text_in, [&](std::size_t line_no, std::string_view line) {
    if (text::trim(line).empty()) return;
    std::string why;
    if (auto f = parse_candump_line(line, why)) {
      out.frames.push_back(*f);
    } else {
      out.warnings.push_back({line_no, "malformed line: " + why});
    }
  });
  if (out.frames.empty()) throw Error(ErrorCode::EmptyTrace, "no valid candump lines in " + out.source);
  return out;
}

RawTrace parse_csv(std::string_view text_in, const CsvColumns& columns, std::string source) {
  RawTrace out;
  out.source = std::move(source);
  std::vector<std::size_t> index;  // timestamp, id, dlc, data
  bool have_header = false;
  text::for_each_line(text_in, [&](std::size_t line_no, std::string_view line) {
    if (text::trim(line).empty()) return;
    const auto cells = text::split(line, columns.delimiter);
    if (!have_header) {
      have_header = true;
      for (const auto* wanted : {&columns.timestamp, &columns.id, &columns.dlc, &columns.data}) {
        const auto name = text::lower(*wanted);
        auto it = std::find_if(cells.begin(), cells.end(), [&](std::string_view c) {
          return text::lower(text::unquote(c)) == name;
        });
        if (it == cells.end()) throw Error(ErrorCode::MissingColumn, "CSV header lacks column '" + *wanted + "'");
        index.push_back(static_cast<std::size_t>(it - cells.begin()));
      }
      return;
    }
    auto warn = [&](const std::string& why) { out.warnings.push_back({line_no, "malformed row: " + why}); };
    if (*std::max_element(index.begin(), index.end()) >= cells.size()) return warn("too few cells");
    const auto ts = text::parse_number<double>(text::unquote(cells[index[0]]));
    if (!ts || *ts < 0.0) return warn("bad timestamp");
    const auto id = parse_id(text::unquote(cells[index[1]]));
    if (!id) return warn("bad CAN id");
    const auto dlc = text::parse_number<int>(text::unquote(cells[index[2]]));
    if (!dlc || *dlc < 0 || *dlc > static_cast<int>(kMaxPayload)) return warn("bad dlc");
    const auto bytes = text::parse_hex_bytes(text::unquote(cells[index[3]]));
    if (!bytes) return warn("bad payload");
    if (static_cast<int>(bytes->size()) != *dlc) return warn("dlc does not match payload length");
    Frame f;
    f.timestamp = *ts;
    f.can_id = id->id;
    f.extended = id->extended;
    fill_payload(f, *bytes);
    out.frames.push_back(f);
  });
  if (!have_header) throw Error(ErrorCode::EmptyTrace, "empty CSV " + out.source);
  if (out.frames.empty()) throw Error(ErrorCode::EmptyTrace, "no valid CSV rows in " + out.source);
  return out;
}

RawTrace read_trace_file(const std::string& path, TraceFormat format, const CsvColumns& columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string content = ss.str();
  return format == TraceFormat::Candump ? parse_candump(content, path) : parse_csv(content, columns, path);
}

std::string format_id(std::uint32_t key) {
  char buf[16];
  if (key & kExtendedFlag) {
    std::snprintf(buf, sizeof buf, "0x%08X", key & ~kExtendedFlag);
  } else {
    std::snprintf(buf, sizeof buf, "0x%03X", key);
  }
  return buf;
}

std::string to_candump(const Frame& frame, std::string_view iface) {
  char head[64];
  std::snprintf(head, sizeof head, frame.extended ? "(%.6f) %.*s %08X#" : "(%.6f) %.*s %03X#",
                frame.timestamp, static_cast<int>(iface.size()), iface.data(), frame.can_id);
  std::string out(head);
  static constexpr char kHex[] = "0123456789ABCDEF";
  for (auto b : frame.payload()) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

std::string to_candump(const RawTrace& trace, std::string_view iface) {
  std::string out;
  out.reserve(trace.frames.size() * 40);
  for (const auto& f : trace.frames) {
    out += to_candump(f, iface);
    out.push_back('\n');
  }
  return out;
}

IdTrace::IdTrace(std::uint32_t key, std::vector<Frame> frames) : key_(key) {
  std::stable_sort(frames.begin(), frames.end(),
                   [](const Frame& a, const Frame& b) { return a.timestamp < b.timestamp; });
  for (const auto& f : frames) width_ = std::max<std::size_t>(width_, f.dlc);
  timestamps_.reserve(frames.size());
  dlc_.reserve(frames.size());
  bytes_.assign(frames.size() * width_, 0);
  bits_.assign(frames.size() * width_ * 8, 0);
  for (std::size_t r = 0; r < frames.size(); ++r) {
    const auto& f = frames[r];
    timestamps_.push_back(f.timestamp);
    dlc_.push_back(f.dlc);
    if (f.dlc < width_) padded_ = true;
    for (std::size_t i = 0; i < f.dlc; ++i) {
      bytes_[r * width_ + i] = f.data[i];
      for (std::size_t k = 0; k < 8; ++k) {
        bits_[r * width_ * 8 + i * 8 + k] = static_cast<std::uint8_t>((f.data[i] >> (7 - k)) & 1u);
      }
    }
  }
}

TraceMap group_by_id(const RawTrace& trace) {
  std::map<std::uint32_t, std::vector<Frame>> buckets;
  for (const auto& f : trace.frames) buckets[message_key(f)].push_back(f);
  TraceMap out;
  for (auto& [key, frames] : buckets) out.emplace(key, IdTrace(key, std::move(frames)));
  return out;
}

}  // namespace cansig

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cansig/error.hpp"

namespace cansig {

inline constexpr std::size_t kMaxPayload = 8;
inline constexpr std::uint32_t kMaxStandardId = 0x7FF;
inline constexpr std::uint32_t kMaxExtendedId = 0x1FFFFFFF;
// Flag used in message keys and DBC message ids for 29-bit identifiers.
inline constexpr std::uint32_t kExtendedFlag = 0x80000000u;

struct Frame {
  double timestamp = 0.0;
  std::uint32_t can_id = 0;
  bool extended = false;
  std::uint8_t dlc = 0;
  std::array<std::uint8_t, kMaxPayload> data{};

  std::span<const std::uint8_t> payload() const { return {data.data(), dlc}; }
  bool operator==(const Frame&) const = default;
};

// Key under which frames are grouped: the id, with kExtendedFlag set for
// 29-bit ids (same convention as DBC message ids).
constexpr std::uint32_t message_key(std::uint32_t can_id, bool extended) {
  return extended ? (can_id | kExtendedFlag) : can_id;
}
constexpr std::uint32_t message_key(const Frame& f) {
  return message_key(f.can_id, f.extended);
}

// "0x1A0" for standard ids, eight hex digits ("0x18DAF110") for extended.
std::string format_id(std::uint32_t key);

struct RawTrace {
  std::vector<Frame> frames;
  std::string source;
  std::vector<Warning> warnings;
};

struct CsvColumns {
  std::string timestamp = "timestamp";
  std::string id = "id";
  std::string dlc = "dlc";
  std::string data = "data";
  char delimiter = ',';
};

enum class TraceFormat { Candump, Csv };

// Lines look like `(1.000000) can0 01A#1122`. Ids with more than three hex
// digits are read as 29-bit extended ids. Bad lines become warnings.
// Throws Error(EmptyTrace) when no line parses.
RawTrace parse_candump(std::string_view text, std::string source = {});

// Header row names the columns (see CsvColumns). Throws MissingColumn when a
// mapped column is absent and EmptyTrace when no row parses.
RawTrace parse_csv(std::string_view text, const CsvColumns& columns = {},
                   std::string source = {});

RawTrace read_trace_file(const std::string& path, TraceFormat format,
                         const CsvColumns& columns = {});

std::string to_candump(const Frame& frame, std::string_view iface = "can0");
std::string to_candump(const RawTrace& trace, std::string_view iface = "can0");

// All frames of one CAN id, reformatted as a byte matrix (T_C x L) and a bit
// matrix (T_C x 8L). Rows are frames in timestamp order; frames shorter than
// L are padded with 0x00 and their padded bytes are masked out.
//
// Matrix accessors take 0-based (row, column). Domain positions used
// elsewhere (bytes 1..L, bits 1..8L, MSB-first) are 1-based.
class IdTrace {
 public:
  IdTrace(std::uint32_t key, std::vector<Frame> frames);

  std::uint32_t key() const noexcept { return key_; }
  std::uint32_t can_id() const noexcept { return key_ & ~kExtendedFlag; }
  bool extended() const noexcept { return (key_ & kExtendedFlag) != 0; }

  std::size_t frames() const noexcept { return timestamps_.size(); }
  std::size_t width() const noexcept { return width_; }
  std::size_t bit_width() const noexcept { return 8 * width_; }
  // Features need at least two frames.
  bool usable() const noexcept { return frames() >= 2; }
  bool padded() const noexcept { return padded_; }

  std::uint8_t byte(std::size_t row, std::size_t col) const {
    return bytes_[row * width_ + col];
  }
  std::uint8_t bit(std::size_t row, std::size_t col) const {
    return bits_[row * 8 * width_ + col];
  }
  bool byte_valid(std::size_t row, std::size_t col) const {
    return col < dlc_[row];
  }
  bool bit_valid(std::size_t row, std::size_t col) const {
    return col / 8 < dlc_[row];
  }
  std::uint8_t dlc(std::size_t row) const { return dlc_[row]; }
  double timestamp(std::size_t row) const { return timestamps_[row]; }
  std::span<const double> timestamps() const { return timestamps_; }
  std::span<const std::uint8_t> row_bytes(std::size_t row) const {
    return {bytes_.data() + row * width_, width_};
  }

 private:
  std::uint32_t key_;
  std::size_t width_ = 0;
  bool padded_ = false;
  std::vector<double> timestamps_;
  std::vector<std::uint8_t> dlc_;
  std::vector<std::uint8_t> bytes_;
  std::vector<std::uint8_t> bits_;
};

using TraceMap = std::map<std::uint32_t, IdTrace>;

// Groups by message key. Frames of one id are stably sorted by timestamp.
TraceMap group_by_id(const RawTrace& trace);

}  // namespace cansig

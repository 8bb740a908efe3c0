#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "cansig/features.hpp"

namespace cansig {

enum class GeneralLabel { Unused, Switch, Dynamic, Verification };

const char* to_string(GeneralLabel label) noexcept;
std::optional<GeneralLabel> parse_general_label(std::string_view text);

// Bit set over payload positions: position k (1-based, MSB-first) is bit k-1.
using BitMask = std::uint64_t;

constexpr BitMask range_mask(std::size_t first_bit, std::size_t last_bit) {
  const std::size_t len = last_bit - first_bit + 1;
  const BitMask ones = len >= 64 ? ~BitMask{0} : ((BitMask{1} << len) - 1);
  return ones << (first_bit - 1);
}

// A contiguous bit range [first_bit, last_bit] of one CAN id's payload, plus
// whatever the later pipeline stages have attached to it.
struct SignalSlice {
  std::uint32_t key = 0;  // message key (see message_key)
  std::size_t first_bit = 1;
  std::size_t last_bit = 1;
  BlockFeatures features;
  double theta = 0.0;
  std::optional<GeneralLabel> label;
  std::optional<std::string> descriptive_label;
  std::optional<double> dtw_distance;

  std::size_t length() const noexcept { return last_bit - first_bit + 1; }
  BitMask mask() const noexcept { return range_mask(first_bit, last_bit); }
  bool operator==(const SignalSlice&) const = default;
};

}  // namespace cansig

#include "cansig/features.hpp"

#include <algorithm>
#include <bitset>
#include <cmath>
#include <string>
#include <vector>

namespace cansig {

namespace {

void check_bit_range(const IdTrace& trace, std::size_t first, std::size_t last) {
  if (first < 1 || last < first || last > trace.bit_width() || last - first + 1 > 64) {
    throw Error(ErrorCode::InvalidRange, "bit range [" + std::to_string(first) + "," +
                                             std::to_string(last) + "] outside payload of " +
                                             std::to_string(trace.bit_width()) + " bits");
  }
}

// Flip count and pair count over adjacent rows where `valid` holds for both.
template <typename Valid, typename Value>
std::pair<std::size_t, std::size_t> count_flips(std::size_t rows, Valid valid, Value value) {
  std::size_t flips = 0;
  std::size_t pairs = 0;
  for (std::size_t r = 0; r + 1 < rows; ++r) {
    if (!valid(r) || !valid(r + 1)) continue;
    ++pairs;
    if (value(r) != value(r + 1)) ++flips;
  }
  return {flips, pairs};
}

[[noreturn]] void too_few(const IdTrace& trace) {
  throw Error(ErrorCode::TooFewFrames,
              "CAN id " + format_id(trace.key()) + " has fewer than two usable frames");
}

}  // namespace

ByteFeatures compute_byte_features(const IdTrace& trace, std::size_t byte_pos) {
  if (byte_pos < 1 || byte_pos > trace.width()) {
    throw Error(ErrorCode::InvalidRange, "byte " + std::to_string(byte_pos) + " outside payload");
  }
  const std::size_t col = byte_pos - 1;
  const auto valid = [&](std::size_t r) { return trace.byte_valid(r, col); };
  const auto value = [&](std::size_t r) { return trace.byte(r, col); };
  const auto [flips, pairs] = count_flips(trace.frames(), valid, value);
  if (pairs == 0) too_few(trace);

  std::bitset<256> seen;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < trace.frames(); ++r) {
    if (!valid(r)) continue;
    seen.set(value(r));
    sum += value(r);
    ++n;
  }
  return {static_cast<double>(flips) / static_cast<double>(pairs), sum / static_cast<double>(n),
          static_cast<double>(seen.count()) / 256.0};
}

BitFeatures compute_bit_features(const IdTrace& trace, std::size_t bit_pos) {
  check_bit_range(trace, bit_pos, bit_pos);
  const std::size_t col = bit_pos - 1;
  const auto valid = [&](std::size_t r) { return trace.bit_valid(r, col); };
  const auto value = [&](std::size_t r) { return trace.bit(r, col); };
  const auto [flips, pairs] = count_flips(trace.frames(), valid, value);
  if (pairs == 0) too_few(trace);

  std::size_t ones = 0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < trace.frames(); ++r) {
    if (!valid(r)) continue;
    ones += value(r);
    ++n;
  }
  return {static_cast<double>(flips) / static_cast<double>(pairs),
          static_cast<double>(ones) / static_cast<double>(n)};
}

std::uint64_t block_value(const IdTrace& trace, std::size_t row, std::size_t first_bit,
                          std::size_t last_bit) {
  std::uint64_t v = 0;
  for (std::size_t k = first_bit; k <= last_bit; ++k) v = (v << 1) | trace.bit(row, k - 1);
  return v;
}

BlockFeatures compute_block_features(const IdTrace& trace, std::size_t first_bit,
                                     std::size_t last_bit) {
  check_bit_range(trace, first_bit, last_bit);
  const std::size_t len = last_bit - first_bit + 1;
  // The last bit lies in the highest byte, so its validity covers the block.
  const auto valid = [&](std::size_t r) { return trace.bit_valid(r, last_bit - 1); };

  std::vector<std::uint64_t> values;
  values.reserve(trace.frames());
  std::vector<std::uint8_t> row_valid(trace.frames());
  for (std::size_t r = 0; r < trace.frames(); ++r) {
    row_valid[r] = valid(r);
    values.push_back(row_valid[r] ? block_value(trace, r, first_bit, last_bit) : 0);
  }
  const auto [flips, pairs] = count_flips(
      trace.frames(), [&](std::size_t r) { return row_valid[r] != 0; },
      [&](std::size_t r) { return values[r]; });
  if (pairs == 0) too_few(trace);

  long double sum = 0.0L;
  std::size_t n = 0;
  std::size_t distinct = 0;
  if (len <= 16) {
    std::vector<bool> seen(std::size_t{1} << len, false);
    for (std::size_t r = 0; r < values.size(); ++r) {
      if (!row_valid[r]) continue;
      sum += static_cast<long double>(values[r]);
      ++n;
      if (!seen[values[r]]) {
        seen[values[r]] = true;
        ++distinct;
      }
    }
  } else {
    std::vector<std::uint64_t> kept;
    for (std::size_t r = 0; r < values.size(); ++r) {
      if (!row_valid[r]) continue;
      sum += static_cast<long double>(values[r]);
      ++n;
      kept.push_back(values[r]);
    }
    std::sort(kept.begin(), kept.end());
    distinct = static_cast<std::size_t>(std::unique(kept.begin(), kept.end()) - kept.begin());
  }

  BlockFeatures f;
  f.flip_rate = static_cast<double>(flips) / static_cast<double>(pairs);
  f.mean = static_cast<double>(sum / static_cast<long double>(n));
  f.distinct = distinct;
  f.distinct_ratio = std::ldexp(static_cast<double>(distinct), -static_cast<int>(len));
  return f;
}

}  // namespace cansig

#pragma once

#include <cstddef>
#include <cstdint>

#include "cansig/trace.hpp"

namespace cansig {

// Per-byte statistics of one payload byte column.
struct ByteFeatures {
  double flip_rate = 0.0;       // share of adjacent frames where the byte changes
  double mean = 0.0;            // in [0, 255]
  double distinct_ratio = 0.0;  // |distinct values| / 256
};

struct BitFeatures {
  double flip_rate = 0.0;
  double mean = 0.0;  // in [0, 1]
};

// Statistics of the unsigned value held by bits m..n (MSB-first).
struct BlockFeatures {
  double flip_rate = 0.0;
  double mean = 0.0;            // in [0, 2^len - 1]
  double distinct_ratio = 0.0;  // |distinct values| / 2^len
  std::size_t distinct = 0;

  bool operator==(const BlockFeatures&) const = default;
};

// Positions are 1-based: bytes 1..L, bits 1..8L with bit 1 the MSB of byte 1.
// Rows whose payload does not reach the position are skipped; a flip is only
// counted between two adjacent rows that both carry the position.
// Throws TooFewFrames when fewer than two adjacent valid rows exist and
// InvalidRange for out-of-payload positions.
ByteFeatures compute_byte_features(const IdTrace& trace, std::size_t byte_pos);
BitFeatures compute_bit_features(const IdTrace& trace, std::size_t bit_pos);
BlockFeatures compute_block_features(const IdTrace& trace, std::size_t first_bit,
                                     std::size_t last_bit);

// Unsigned value of bits first_bit..last_bit of one row, MSB-first.
std::uint64_t block_value(const IdTrace& trace, std::size_t row, std::size_t first_bit,
                          std::size_t last_bit);

}  // namespace cansig

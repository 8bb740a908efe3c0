#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "cansig/dbscan.hpp"
#include "cansig/slice.hpp"
#include "cansig/trace.hpp"

namespace cansig {

inline constexpr std::size_t kMaxSegmentBytes = 2;

// 1-based inclusive byte range produced by byte-level clustering.
struct ByteSegment {
  std::size_t first_byte = 1;
  std::size_t last_byte = 1;
  int cluster = kNoise;

  std::size_t first_bit() const noexcept { return 8 * (first_byte - 1) + 1; }
  std::size_t last_bit() const noexcept { return 8 * last_byte; }
  bool operator==(const ByteSegment&) const = default;
};

// b and a already share the unit interval, so bit features go in raw.
struct BitOptions {
  bool standardize = false;
  // Bits that never flip are kept out of slices with bits that do.
  bool split_constant = true;
};

struct SliceParams {
  DbscanParams byte_level;
  DbscanParams bit_level{0.6, 2};
  BitOptions bits;
};

// Turns per-byte cluster ids into segments: adjacent bytes with the same
// cluster merge left to right, runs longer than two bytes are cut into
// consecutive two-byte segments, noise bytes stand alone.
std::vector<ByteSegment> merge_byte_labels(std::span<const int> labels);

// Same rule without a length cap, for bits. Returns 0-based inclusive runs.
std::vector<std::pair<std::size_t, std::size_t>> merge_adjacent(std::span<const int> labels);

// Byte-level step: each byte becomes the point (B, A/255, U), standardized
// per id, clustered with DBSCAN and merged into segments that tile the
// payload. Throws TooFewFrames for ids without two usable frames.
std::vector<ByteSegment> cluster_bytes(const IdTrace& trace, const DbscanParams& params);

// Bit-level step inside one segment: each bit becomes the point (b, a),
// clustered and merged into slices that tile the segment. Slices carry their block features.
std::vector<SignalSlice> slice_bits(const IdTrace& trace, const ByteSegment& segment,
                                    const DbscanParams& params, const BitOptions& options = {});

// Both steps for one id.
std::vector<SignalSlice> slice_trace(const IdTrace& trace, const SliceParams& params);

}  // namespace cansig

#include "cansig/slicing.hpp"

#include "cansig/features.hpp"

namespace cansig {

std::vector<std::pair<std::size_t, std::size_t>> merge_adjacent(std::span<const int> labels) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t i = 0;
  while (i < labels.size()) {
    std::size_t j = i;
    if (labels[i] != kNoise) {
      while (j + 1 < labels.size() && labels[j + 1] == labels[i]) ++j;
    }
    runs.emplace_back(i, j);
    i = j + 1;
  }
  return runs;
}

std::vector<ByteSegment> merge_byte_labels(std::span<const int> labels) {
  std::vector<ByteSegment> out;
  for (const auto& [first, last] : merge_adjacent(labels)) {
    for (std::size_t start = first; start <= last; start += kMaxSegmentBytes) {
      const std::size_t end = std::min(last, start + kMaxSegmentBytes - 1);
      out.push_back({start + 1, end + 1, labels[first]});
    }
  }
  return out;
}

std::vector<ByteSegment> cluster_bytes(const IdTrace& trace, const DbscanParams& params) {
  const std::size_t width = trace.width();
  if (width == 0) return {};
  PointSet raw(width, 3);
  for (std::size_t i = 0; i < width; ++i) {
    const auto f = compute_byte_features(trace, i + 1);
    raw.at(i, 0) = f.flip_rate;
    raw.at(i, 1) = f.mean / 255.0;
    raw.at(i, 2) = f.distinct_ratio;
  }
  const auto labels = dbscan(standardize(raw), params);
  return merge_byte_labels(labels);
}

std::vector<SignalSlice> slice_bits(const IdTrace& trace, const ByteSegment& segment,
                                    const DbscanParams& params, const BitOptions& options) {
  const std::size_t first = segment.first_bit();
  const std::size_t count = segment.last_bit() - first + 1;
  PointSet raw(count, 2);
  for (std::size_t k = 0; k < count; ++k) {
    const auto f = compute_bit_features(trace, first + k);
    raw.at(k, 0) = f.flip_rate;
    raw.at(k, 1) = f.mean;
  }
  auto labels = dbscan(options.standardize ? cansig::standardize(raw) : raw, params);
  if (options.split_constant) {
    for (std::size_t k = 0; k < count; ++k) {
      if (labels[k] != kNoise) labels[k] = 2 * labels[k] + (raw.at(k, 0) == 0.0 ? 1 : 0);
    }
  }

  std::vector<SignalSlice> out;
  for (const auto& [lo, hi] : merge_adjacent(labels)) {
    SignalSlice s;
    s.key = trace.key();
    s.first_bit = first + lo;
    s.last_bit = first + hi;
    s.features = compute_block_features(trace, s.first_bit, s.last_bit);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SignalSlice> slice_trace(const IdTrace& trace, const SliceParams& params) {
  std::vector<SignalSlice> out;
  for (const auto& segment : cluster_bytes(trace, params.byte_level)) {
    auto slices = slice_bits(trace, segment, params.bit_level, params.bits);
    out.insert(out.end(), std::make_move_iterator(slices.begin()),
               std::make_move_iterator(slices.end()));
  }
  return out;
}

}  // namespace cansig

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cansig/dtw.hpp"
#include "cansig/obd.hpp"
#include "cansig/slice.hpp"
#include "cansig/trace.hpp"

namespace cansig {

// Values of one slice across the frames of its id, in frame order.
struct CandidateSeries {
  std::uint32_t key = 0;
  std::size_t first_bit = 1;
  std::size_t last_bit = 1;
  std::vector<double> timestamps;
  std::vector<double> values;
};

struct MatchOptions {
  DtwOptions dtw;
  std::size_t max_series = 5000;        // candidates are downsampled to this many points
  std::optional<double> max_distance;  // reject matches farther than this
};

struct DtwResult {
  double distance = 0.0;
  std::string label;  // empty when rejected by max_distance
  std::map<std::string, double> distances;
  bool rejected = false;
};

// Frames where the slice's bytes are padding are skipped.
CandidateSeries serialize_signal(const IdTrace& trace, const SignalSlice& slice);

// DTW against every template; the smallest distance wins and ties go to the
// label that sorts first. Throws NoTemplates for an empty set.
DtwResult match_label(const CandidateSeries& candidate, const TemplateSet& templates,
                      const MatchOptions& options = {});

}  // namespace cansig

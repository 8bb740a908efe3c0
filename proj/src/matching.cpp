#include "cansig/matching.hpp"

#include "cansig/features.hpp"

namespace cansig {

CandidateSeries serialize_signal(const IdTrace& trace, const SignalSlice& slice) {
  if (slice.first_bit < 1 || slice.last_bit < slice.first_bit || slice.last_bit > trace.bit_width()) {
    throw Error(ErrorCode::InvalidRange, "slice outside payload of " + format_id(trace.key()));
  }
  CandidateSeries out;
  out.key = trace.key();
  out.first_bit = slice.first_bit;
  out.last_bit = slice.last_bit;
  out.timestamps.reserve(trace.frames());
  out.values.reserve(trace.frames());
  for (std::size_t r = 0; r < trace.frames(); ++r) {
    if (!trace.bit_valid(r, slice.last_bit - 1)) continue;
    out.timestamps.push_back(trace.timestamp(r));
    out.values.push_back(static_cast<double>(block_value(trace, r, slice.first_bit, slice.last_bit)));
  }
  return out;
}

DtwResult match_label(const CandidateSeries& candidate, const TemplateSet& templates,
                      const MatchOptions& options) {
  if (templates.empty()) throw Error(ErrorCode::NoTemplates, "no OBD-II templates to match against");
  const auto series = downsample(candidate.values, options.max_series);
  DtwResult out;
  bool first = true;
  for (const auto& [label, tmpl] : templates) {
    const double d = dtw_distance(tmpl.values, series, options.dtw);
    out.distances.emplace(label, d);
    if (first || d < out.distance) {
      out.distance = d;
      out.label = label;
      first = false;
    }
  }
  if (options.max_distance && out.distance > *options.max_distance) {
    out.rejected = true;
    out.label.clear();
  }
  return out;
}

}  // namespace cansig

#include "cansig/pipeline.hpp"

#include <exception>
#include <optional>

#include <omp.h>

#include "cansig/obd.hpp"

namespace cansig {

namespace {

// Runs fn(i) for i in [0, n). Exceptions stay with their index so one bad
// item cannot abort the parallel region.
template <typename Fn>
std::vector<std::exception_ptr> run_indexed(std::size_t n, Exec exec, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  const auto body = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (exec == Exec::Serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
  } else {
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  }
  return errors;
}

std::string describe(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  }
}

}  // namespace

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

std::vector<std::uint32_t> signal_ids(const TraceMap& traces) {
  std::vector<std::uint32_t> out;
  for (const auto& [key, t] : traces) {
    if (!is_diagnostic_id(key)) out.push_back(key);
  }
  return out;
}

SliceResult slice_all(const TraceMap& traces, const SliceParams& params, Exec exec) {
  const auto ids = signal_ids(traces);
  std::vector<std::vector<SignalSlice>> per_id(ids.size());
  const auto errors = run_indexed(ids.size(), exec, [&](std::size_t i) {
    per_id[i] = slice_trace(traces.at(ids[i]), params);
  });

  SliceResult out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (errors[i]) {
      out.warnings.push_back(format_id(ids[i]) + " skipped: " + describe(errors[i]));
      continue;
    }
    const auto& t = traces.at(ids[i]);
    out.messages[ids[i]] = {t.frames(), t.width()};
    out.slices.insert(out.slices.end(), per_id[i].begin(), per_id[i].end());
  }
  return out;
}

std::vector<std::string> match_all(std::span<SignalSlice> slices, const TraceMap& traces,
                                   const TemplateSet& templates, const MatchOptions& options, Exec exec) {
  std::vector<std::size_t> dynamic;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    if (slices[i].label == GeneralLabel::Dynamic) dynamic.push_back(i);
  }
  if (!dynamic.empty() && templates.empty()) {
    throw Error(ErrorCode::NoTemplates, "no OBD-II templates to match against");
  }
  std::vector<std::optional<DtwResult>> results(dynamic.size());
  const auto errors = run_indexed(dynamic.size(), exec, [&](std::size_t i) {
    const auto& slice = slices[dynamic[i]];
    const auto it = traces.find(slice.key);
    if (it == traces.end()) throw Error(ErrorCode::EmptyTrace, "id not present in the trace");
    results[i] = match_label(serialize_signal(it->second, slice), templates, options);
  });

  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < dynamic.size(); ++i) {
    auto& slice = slices[dynamic[i]];
    if (errors[i]) {
      warnings.push_back(format_id(slice.key) + " bits " + std::to_string(slice.first_bit) + "-" +
                         std::to_string(slice.last_bit) + " not matched: " + describe(errors[i]));
      continue;
    }
    slice.dtw_distance = results[i]->distance;
    if (results[i]->rejected) {
      slice.descriptive_label.reset();
    } else {
      slice.descriptive_label = results[i]->label;
    }
  }
  return warnings;
}

std::vector<FeatureTable> feature_tables(const TraceMap& traces, Exec exec) {
  std::vector<const IdTrace*> list;
  for (const auto& [key, t] : traces) list.push_back(&t);
  std::vector<FeatureTable> out(list.size());
  const auto errors = run_indexed(list.size(), exec, [&](std::size_t i) {
    const IdTrace& t = *list[i];
    auto& table = out[i];
    table.key = t.key();
    table.frames = t.frames();
    if (!t.usable()) return;
    for (std::size_t b = 1; b <= t.width(); ++b) table.bytes.push_back(compute_byte_features(t, b));
    for (std::size_t b = 1; b <= t.bit_width(); ++b) table.bits.push_back(compute_bit_features(t, b));
  });
  // A column without two adjacent valid rows empties the whole table.
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (errors[i]) {
      out[i].bytes.clear();
      out[i].bits.clear();
    }
  }
  return out;
}

}  // namespace cansig

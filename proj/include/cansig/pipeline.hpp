#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cansig/features.hpp"
#include "cansig/labeling.hpp"
#include "cansig/matching.hpp"
#include "cansig/slicing.hpp"
#include "cansig/trace.hpp"

namespace cansig {

// Every kernel below has a serial reference and an OpenMP version; both
// produce identical results.
enum class Exec { Serial, Parallel };

// OpenMP thread count for Parallel kernels; 0 keeps the runtime default.
void set_threads(int threads);
int max_threads();

// Trace ids that go through slicing: diagnostic (OBD-II) ids are left out.
std::vector<std::uint32_t> signal_ids(const TraceMap& traces);

struct MessageInfo {
  std::size_t frames = 0;
  std::size_t width = 0;
};

struct SliceResult {
  std::vector<SignalSlice> slices;  // ordered by id, then position
  std::map<std::uint32_t, MessageInfo> messages;
  std::vector<std::string> warnings;  // ids that could not be sliced
};

SliceResult slice_all(const TraceMap& traces, const SliceParams& params, Exec exec = Exec::Parallel);

// Attaches descriptive labels and DTW distances to the slices labeled
// Dynamic. Slices whose id is missing from traces or whose series is too
// short are skipped with a warning.
std::vector<std::string> match_all(std::span<SignalSlice> slices, const TraceMap& traces,
                                   const TemplateSet& templates, const MatchOptions& options,
                                   Exec exec = Exec::Parallel);

struct FeatureTable {
  std::uint32_t key = 0;
  std::size_t frames = 0;
  std::vector<ByteFeatures> bytes;
  std::vector<BitFeatures> bits;
};

// Ids with fewer than two frames get empty tables.
std::vector<FeatureTable> feature_tables(const TraceMap& traces, Exec exec = Exec::Parallel);

}  // namespace cansig

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cansig/matching.hpp"
#include "cansig/pipeline.hpp"
#include "cansig/slicing.hpp"

namespace cansig {

// The stages write one JSON schema (cansig.slices/1, see docs/schema.md);
// each stage adds its fields to the previous stage's document.
enum class Stage { Sliced, Labeled, Matched };

struct PipelineParams {
  SliceParams slice;
  std::optional<double> eps0_override;
  MatchOptions match;
};

struct SliceDocument {
  Stage stage = Stage::Sliced;
  PipelineParams params;
  std::optional<double> eps0;  // threshold actually used (Labeled onwards)
  std::map<std::uint32_t, MessageInfo> messages;
  std::vector<SignalSlice> slices;
  std::vector<std::string> warnings;
};

std::string write_slices_json(const SliceDocument& doc);
// Throws Error(Format) on schema violations.
SliceDocument read_slices_json(std::string_view text);

}  // namespace cansig

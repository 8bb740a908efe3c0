#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cansig/features.hpp"
#include "cansig/slice.hpp"

namespace cansig {

// Block flip rate at or above this marks a counter or checksum.
inline constexpr double kVerificationFlipFloor = 0.99;

// Labeling parameter: block flip rate times distinct-value ratio.
constexpr double compute_theta(const BlockFeatures& f) noexcept {
  return f.flip_rate * f.distinct_ratio;
}

// Threshold separating Switch from Dynamic/Verification, derived from the
// positive theta values of a whole trace (zeros are ignored). The sorted
// values are split in two at the gap that maximizes the between-group
// variance of log(theta); the threshold is the midpoint of that gap. When
// all positive values are equal the threshold is that value.
// Throws NoActiveSignals when no theta is positive.
double derive_threshold(std::span<const double> thetas);

// Unused when theta and the flip rate are zero; Switch for theta up to eps0
// (inclusive); above eps0, Verification when the flip rate reaches 0.99 and
// Dynamic otherwise. A zero theta with a non-zero flip rate cannot come out
// of compute_theta and is treated as Switch.
GeneralLabel assign_general_label(double theta, const BlockFeatures& features, double eps0);

struct LabelSummary {
  std::optional<double> eps0;  // unset when the trace had no active slice
  bool eps0_overridden = false;
};

// Sets theta and label on every slice. Uses eps0_override when given,
// otherwise derives the threshold from all slices together.
LabelSummary label_slices(std::span<SignalSlice> slices, std::optional<double> eps0_override = {});

}  // namespace cansig

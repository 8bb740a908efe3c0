#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace cansig {

struct DtwOptions {
  bool normalize = true;            // z-normalize both series first
  std::optional<std::size_t> band;  // Sakoe-Chiba half-width around the scaled diagonal
};

// Subtracts the mean and divides by the population standard deviation. A
// constant series becomes all zeros.
std::vector<double> z_normalize(std::span<const double> series);

// Keeps max_points evenly spaced samples (index floor(i * n / max_points)).
std::vector<double> downsample(std::span<const double> series, std::size_t max_points);

struct DtwAlignment {
  double distance = 0.0;
  // Warping path as (index into first, index into second), from (0,0) to
  // (y-1, z-1).
  std::vector<std::pair<std::size_t, std::size_t>> path;
};

// Classic DTW with squared pointwise cost; the distance is the square root
// of the cheapest admissible path sum. Both series need at least two points
// (SeriesTooShort otherwise).
double dtw_distance(std::span<const double> s, std::span<const double> e,
                    const DtwOptions& options = {});
DtwAlignment dtw_align(std::span<const double> s, std::span<const double> e,
                       const DtwOptions& options = {});

}  // namespace cansig

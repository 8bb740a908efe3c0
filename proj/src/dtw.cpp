#include "cansig/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cansig/error.hpp"

namespace cansig {

std::vector<double> z_normalize(std::span<const double> series) {
  std::vector<double> out(series.begin(), series.end());
  if (out.empty()) return out;
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(out.size());
  double ss = 0.0;
  for (double v : out) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(out.size()));
  const bool constant = std::all_of(out.begin(), out.end(), [&](double v) { return v == out[0]; });
  for (double& v : out) v = constant || sd == 0.0 ? 0.0 : (v - mean) / sd;
  return out;
}

std::vector<double> downsample(std::span<const double> series, std::size_t max_points) {
  if (max_points == 0 || series.size() <= max_points) return {series.begin(), series.end()};
  std::vector<double> out;
  out.reserve(max_points);
  for (std::size_t i = 0; i < max_points; ++i) out.push_back(series[i * series.size() / max_points]);
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Prepared {
  std::vector<double> s;
  std::vector<double> e;
};

Prepared prepare(std::span<const double> s, std::span<const double> e, const DtwOptions& options) {
  if (s.size() < 2 || e.size() < 2) {
    throw Error(ErrorCode::SeriesTooShort, "DTW needs series of at least two points");
  }
  if (options.normalize) return {z_normalize(s), z_normalize(e)};
  return {{s.begin(), s.end()}, {e.begin(), e.end()}};
}

// Inclusive column window of row i.
struct Window {
  std::size_t lo;
  std::size_t hi;
};

class BandWindow {
 public:
  BandWindow(std::size_t rows, std::size_t cols, std::optional<std::size_t> band)
      : cols_(cols), enabled_(band.has_value()) {
    slope_ = static_cast<double>(cols - 1) / static_cast<double>(rows - 1);
    if (enabled_) half_ = std::max(static_cast<double>(*band), std::ceil(slope_));
  }

  Window operator()(std::size_t i) const {
    if (!enabled_) return {0, cols_ - 1};
    const double centre = slope_ * static_cast<double>(i);
    const double lo = std::max(0.0, std::floor(centre - half_));
    const double hi = std::min(static_cast<double>(cols_ - 1), std::ceil(centre + half_));
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
  }

 private:
  std::size_t cols_;
  bool enabled_;
  double slope_ = 1.0;
  double half_ = 0.0;
};

}  // namespace

double dtw_distance(std::span<const double> s_in, std::span<const double> e_in,
                    const DtwOptions& options) {
  const auto [s, e] = prepare(s_in, e_in, options);
  const std::size_t y = s.size();
  const std::size_t z = e.size();
  const BandWindow window(y, z, options.band);

  std::vector<double> prev(z, kInf);
  std::vector<double> curr(z, kInf);
  for (std::size_t i = 0; i < y; ++i) {
    std::fill(curr.begin(), curr.end(), kInf);
    const auto [lo, hi] = window(i);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double d = (s[i] - e[j]) * (s[i] - e[j]);
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = kInf;
        if (i > 0) best = std::min(best, prev[j]);
        if (j > 0) best = std::min(best, curr[j - 1]);
        if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
      }
      curr[j] = d + best;
    }
    std::swap(prev, curr);
  }
  return std::sqrt(prev[z - 1]);
}

DtwAlignment dtw_align(std::span<const double> s_in, std::span<const double> e_in,
                       const DtwOptions& options) {
  const auto [s, e] = prepare(s_in, e_in, options);
  const std::size_t y = s.size();
  const std::size_t z = e.size();
  const BandWindow window(y, z, options.band);

  std::vector<double> cost(y * z, kInf);
  const auto at = [&](std::size_t i, std::size_t j) -> double& { return cost[i * z + j]; };
  for (std::size_t i = 0; i < y; ++i) {
    const auto [lo, hi] = window(i);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double d = (s[i] - e[j]) * (s[i] - e[j]);
      double best = (i == 0 && j == 0) ? 0.0 : kInf;
      if (i > 0) best = std::min(best, at(i - 1, j));
      if (j > 0) best = std::min(best, at(i, j - 1));
      if (i > 0 && j > 0) best = std::min(best, at(i - 1, j - 1));
      at(i, j) = d + best;
    }
  }

  DtwAlignment out;
  out.distance = std::sqrt(at(y - 1, z - 1));
  std::size_t i = y - 1;
  std::size_t j = z - 1;
  out.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    // Diagonal first on ties.
    if (i > 0 && j > 0 && at(i - 1, j - 1) <= at(i - 1, j) && at(i - 1, j - 1) <= at(i, j - 1)) {
      --i;
      --j;
    } else if (i > 0 && (j == 0 || at(i - 1, j) <= at(i, j - 1))) {
      --i;
    } else {
      --j;
    }
    out.path.emplace_back(i, j);
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

}  // namespace cansig

#include "cansig/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "cansig/error.hpp"

namespace cansig {

double euclidean(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

namespace {

std::vector<std::size_t> region_query(const PointSet& points, std::size_t i, double eps) {
  std::vector<std::size_t> out;
  const auto p = points.point(i);
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (euclidean(p, points.point(j)) <= eps) out.push_back(j);
  }
  return out;
}

}  // namespace

std::vector<int> dbscan(const PointSet& points, const DbscanParams& params) {
  if (!(params.eps > 0.0) || params.min_pts == 0) {
    throw Error(ErrorCode::InvalidParams, "DBSCAN needs eps > 0 and min_pts >= 1");
  }
  constexpr int kUnvisited = -2;
  std::vector<int> label(points.size(), kUnvisited);
  int next_cluster = 0;

  for (std::size_t i = 0; i < points.size(); ++i) {
    if (label[i] != kUnvisited) continue;
    const auto seeds = region_query(points, i, params.eps);
    if (seeds.size() < params.min_pts) {
      label[i] = kNoise;
      continue;
    }
    const int cluster = next_cluster++;
    label[i] = cluster;
    std::deque<std::size_t> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const std::size_t j = queue.front();
      queue.pop_front();
      if (label[j] == kNoise) label[j] = cluster;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = cluster;
      const auto neighbours = region_query(points, j, params.eps);
      if (neighbours.size() >= params.min_pts) {
        queue.insert(queue.end(), neighbours.begin(), neighbours.end());
      }
    }
  }
  return label;
}

PointSet standardize(const PointSet& points) {
  const std::size_t n = points.size();
  if (n == 0) return {};
  std::vector<std::size_t> kept;
  std::vector<double> mean(points.dim(), 0.0);
  std::vector<double> sd(points.dim(), 0.0);
  for (std::size_t d = 0; d < points.dim(); ++d) {
    double lo = points.at(0, d);
    double hi = lo;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, points.at(i, d));
      hi = std::max(hi, points.at(i, d));
      sum += points.at(i, d);
    }
    if (lo == hi) continue;
    mean[d] = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = points.at(i, d) - mean[d];
      ss += diff * diff;
    }
    sd[d] = std::sqrt(ss / static_cast<double>(n));
    kept.push_back(d);
  }
  PointSet out(n, kept.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < kept.size(); ++c) {
      const auto d = kept[c];
      out.at(i, c) = (points.at(i, d) - mean[d]) / sd[d];
    }
  }
  return out;
}

}  // namespace cansig

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cansig {

struct DbscanParams {
  double eps = 0.5;
  std::size_t min_pts = 2;
};

inline constexpr int kNoise = -1;

// Dense row-major point set.
class PointSet {
 public:
  PointSet() = default;
  PointSet(std::size_t count, std::size_t dim) : count_(count), dim_(dim), values_(count * dim) {}

  std::size_t size() const noexcept { return count_; }
  std::size_t dim() const noexcept { return dim_; }
  double& at(std::size_t i, std::size_t d) { return values_[i * dim_ + d]; }
  double at(std::size_t i, std::size_t d) const { return values_[i * dim_ + d]; }
  std::span<const double> point(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }

 private:
  std::size_t count_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

double euclidean(std::span<const double> a, std::span<const double> b);

// Classic DBSCAN. A point's neighbourhood includes itself (distance <= eps).
// Points are visited in index order, so cluster ids are assigned in order of
// each cluster's first core point and a border point joins the first cluster
// that reaches it. Returns a cluster id per point, kNoise for noise.
// Throws InvalidParams for eps <= 0 or min_pts == 0.
std::vector<int> dbscan(const PointSet& points, const DbscanParams& params);

// Z-scores every coordinate and drops coordinates that are constant across
// the set (a set with all coordinates dropped has dimension 0).
PointSet standardize(const PointSet& points);

}  // namespace cansig

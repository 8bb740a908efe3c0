#include "doctest.h"

#include <algorithm>
#include <random>

#include "cansig/dbscan.hpp"
#include "cansig/slicing.hpp"
#include "oracles.hpp"

using namespace cansig;
using oracle::trace_from_rows;

namespace {

PointSet to_points(const std::vector<std::vector<double>>& pts) {
  PointSet p(pts.size(), pts.empty() ? 0 : pts[0].size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t d = 0; d < pts[i].size(); ++d) p.at(i, d) = pts[i][d];
  return p;
}

std::vector<std::pair<std::size_t, std::size_t>> ranges(const std::vector<SignalSlice>& s) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& x : s) out.emplace_back(x.first_bit, x.last_bit);
  return out;
}

using Ranges = std::vector<std::pair<std::size_t, std::size_t>>;

}  // namespace

TEST_CASE("dbscan separates two far pairs") {
  const std::vector<std::vector<double>> pts{{0, 0}, {0.1, 0}, {10, 10}, {10.1, 10}};
  const auto labels = dbscan(to_points(pts), {0.5, 2});
  CHECK(labels == std::vector<int>{0, 0, 1, 1});
  CHECK(labels == oracle::dbscan(pts, 0.5, 2));
}

TEST_CASE("dbscan single point is noise") {
  CHECK(dbscan(to_points({{1.0, 2.0}}), {0.5, 2}) == std::vector<int>{kNoise});
}

TEST_CASE("dbscan identical points form one cluster") {
  const auto labels = dbscan(to_points({{3, 3}, {3, 3}, {3, 3}, {3, 3}}), {0.1, 3});
  CHECK(labels == std::vector<int>{0, 0, 0, 0});
}

TEST_CASE("dbscan rejects bad parameters") {
  CHECK_THROWS_AS(dbscan(to_points({{0.0}}), {0.0, 2}), Error);
  CHECK_THROWS_AS(dbscan(to_points({{0.0}}), {0.5, 0}), Error);
}

TEST_CASE("dbscan matches the naive reference on random sets") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coord(0.0, 10.0);
  for (int instance = 0; instance < 50; ++instance) {
    const std::size_t n = 1 + rng() % 200;
    const std::size_t dim = 1 + rng() % 3;
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    // Points around a few centres so clusters, borders and noise all occur.
    const std::size_t centres = 1 + rng() % 5;
    std::vector<std::vector<double>> c(centres, std::vector<double>(dim));
    for (auto& v : c)
      for (auto& x : v) x = coord(rng);
    std::normal_distribution<double> jitter(0.0, 0.3 + 0.7 * (rng() % 3));
    for (auto& p : pts) {
      const auto& base = c[rng() % centres];
      for (std::size_t d = 0; d < dim; ++d) p[d] = base[d] + jitter(rng);
    }
    const double eps = std::uniform_real_distribution<double>(0.05, 1.5)(rng);
    const std::size_t min_pts = 1 + rng() % 6;
    CHECK(dbscan(to_points(pts), {eps, min_pts}) == oracle::dbscan(pts, eps, min_pts));
  }
}

TEST_CASE("standardize drops constant coordinates") {
  const auto s = standardize(to_points({{1, 5}, {2, 5}, {3, 5}}));
  CHECK(s.dim() == 1);
  CHECK(s.at(0, 0) == doctest::Approx(-std::sqrt(1.5)));
  CHECK(s.at(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("byte merge rule") {
  CHECK(merge_byte_labels(std::vector<int>{0, 0, 1}) == std::vector<ByteSegment>{{1, 2, 0}, {3, 3, 1}});
  CHECK(merge_byte_labels(std::vector<int>{0, 0, 0, 0, 0}) ==
        std::vector<ByteSegment>{{1, 2, 0}, {3, 4, 0}, {5, 5, 0}});
  CHECK(merge_byte_labels(std::vector<int>{kNoise, kNoise}) ==
        std::vector<ByteSegment>{{1, 1, kNoise}, {2, 2, kNoise}});
  CHECK(merge_byte_labels(std::vector<int>{0, 1, 0}) ==
        std::vector<ByteSegment>{{1, 1, 0}, {2, 2, 1}, {3, 3, 0}});
}

TEST_CASE("one-byte payload is one segment") {
  const auto tr = trace_from_rows({{1}, {2}, {3}});
  const auto segs = cluster_bytes(tr, {});
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].first_byte == 1);
  CHECK(segs[0].last_byte == 1);
}

TEST_CASE("twin bytes pair up, the odd byte stands alone") {
  std::vector<std::vector<std::uint8_t>> rows;
  for (int i = 0; i < 40; ++i) {
    const auto v = static_cast<std::uint8_t>(i * 7);
    rows.push_back({v, v, 0x55});
  }
  const auto segs = cluster_bytes(trace_from_rows(rows), {0.5, 2});
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].first_byte == 1);
  CHECK(segs[0].last_byte == 2);
  CHECK(segs[1].first_byte == 3);
  CHECK(segs[1].last_byte == 3);
}

TEST_CASE("eight constant bytes split into two-byte segments") {
  const auto tr = trace_from_rows({{1, 2, 3, 4, 5, 6, 7, 8}, {1, 2, 3, 4, 5, 6, 7, 8}, {1, 2, 3, 4, 5, 6, 7, 8}});
  Ranges got;
  for (const auto& s : cluster_bytes(tr, {0.5, 2})) got.emplace_back(s.first_byte, s.last_byte);
  CHECK(got == Ranges{{1, 2}, {3, 4}, {5, 6}, {7, 8}});
}

TEST_CASE("constant high nibble and busy low nibble") {
  std::mt19937_64 rng(5);
  std::vector<std::vector<std::uint8_t>> rows;
  for (int i = 0; i < 500; ++i) rows.push_back({static_cast<std::uint8_t>(rng() & 0x0F)});
  const auto tr = trace_from_rows(rows);
  const ByteSegment seg{1, 1, 0};
  CHECK(ranges(slice_bits(tr, seg, {0.5, 2})) == Ranges{{1, 4}, {5, 8}});
  CHECK(ranges(slice_bits(tr, seg, {0.5, 2}, {.standardize = true})) == Ranges{{1, 4}, {5, 8}});
}

TEST_CASE("sixteen identical bits form one slice") {
  const auto tr = trace_from_rows({{0, 0}, {0, 0}, {0, 0}});
  CHECK(ranges(slice_bits(tr, {1, 2, 0}, {0.5, 2})) == Ranges{{1, 16}});
}

TEST_CASE("alternating constant and busy bits give one-bit slices") {
  std::mt19937_64 rng(6);
  std::vector<std::vector<std::uint8_t>> rows;
  for (int i = 0; i < 500; ++i) rows.push_back({static_cast<std::uint8_t>(rng() & 0x55)});
  const auto got = ranges(slice_bits(trace_from_rows(rows), {1, 1, 0}, {0.5, 2}));
  CHECK(got == Ranges{{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}, {7, 7}, {8, 8}});
}

TEST_CASE("a rarely flipping bit does not join constant neighbours") {
  // Bit 1 goes high for a while once; bits 2-8 never move.
  std::vector<std::vector<std::uint8_t>> rows;
  for (int i = 0; i < 1000; ++i) rows.push_back({static_cast<std::uint8_t>(i >= 600 && i < 800 ? 0x80 : 0x00)});
  const auto tr = trace_from_rows(rows);
  CHECK(ranges(slice_bits(tr, {1, 1, 0}, {0.6, 2})) == Ranges{{1, 1}, {2, 8}});
  CHECK(ranges(slice_bits(tr, {1, 1, 0}, {0.6, 2}, {.standardize = false, .split_constant = false})) ==
        Ranges{{1, 8}});
}

TEST_CASE("slices tile the payload and respect the caps") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t width = 1 + rng() % 8;
    std::vector<std::vector<std::uint8_t>> rows(2 + rng() % 200, std::vector<std::uint8_t>(width));
    std::vector<std::uint8_t> masks(width);
    for (auto& m : masks) m = static_cast<std::uint8_t>(rng());
    std::uint8_t slow = 0;
    for (auto& r : rows) {
      slow += rng() % 7 == 0;
      for (std::size_t c = 0; c < width; ++c) r[c] = static_cast<std::uint8_t>((c % 3 ? rng() : slow) & masks[c]);
    }
    const auto tr = trace_from_rows(rows);
    SliceParams p;
    p.byte_level.eps = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    p.bit_level.eps = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
    p.bits.standardize = rng() % 2;
    const auto segs = cluster_bytes(tr, p.byte_level);
    for (const auto& seg : segs) CHECK(seg.last_byte - seg.first_byte + 1 <= kMaxSegmentBytes);
    const auto slices = slice_trace(tr, p);
    std::size_t next = 1;
    for (const auto& s : slices) {
      CHECK(s.first_bit == next);
      CHECK(s.last_bit >= s.first_bit);
      CHECK(s.length() <= 16);
      const auto home = std::find_if(segs.begin(), segs.end(), [&](const ByteSegment& g) {
        return g.first_bit() <= s.first_bit && s.first_bit <= g.last_bit();
      });
      REQUIRE(home != segs.end());
      CHECK(s.last_bit <= home->last_bit());
      next = s.last_bit + 1;
    }
    CHECK(next == 8 * width + 1);
    CHECK(slice_trace(tr, p) == slices);
  }
}

#include "doctest.h"

#include <random>

#include "cansig/eval.hpp"
#include "json.hpp"

using namespace cansig;

namespace {

struct Seg {
  std::size_t m, n;
  std::optional<GeneralLabel> label;
  std::string name;
};

SignalSpec spec(std::uint32_t key, const Seg& s, const std::string& sig_name) {
  SignalSpec out;
  out.message_id = key;
  out.name = sig_name;
  out.start_bit = sequential_to_dbc(s.m);
  out.length = static_cast<std::uint32_t>(s.n - s.m + 1);
  out.category = s.label;
  if (!s.name.empty()) out.descriptive = s.name;
  return out;
}

SignalSlice slice(std::uint32_t key, const Seg& s) {
  SignalSlice out;
  out.key = key;
  out.first_bit = s.m;
  out.last_bit = s.n;
  out.label = s.label;
  if (!s.name.empty()) out.descriptive_label = s.name;
  return out;
}

struct Case {
  GroundTruth truth;
  InferredMap inferred;
};

void add(Case& c, std::uint32_t key, std::size_t width, const std::vector<Seg>& truth,
         const std::vector<Seg>& inferred) {
  MessageSpec msg;
  msg.id = key;
  msg.dlc = static_cast<std::uint32_t>(width);
  for (std::size_t i = 0; i < truth.size(); ++i) msg.signals.push_back(spec(key, truth[i], "S" + std::to_string(key) + "_" + std::to_string(i)));
  c.truth.messages[key] = msg;
  InferredMessage im;
  im.key = key;
  im.width = width;
  for (const auto& s : inferred) im.slices.push_back(slice(key, s));
  c.inferred[key] = im;
}

constexpr auto U = GeneralLabel::Unused;
constexpr auto S = GeneralLabel::Switch;
constexpr auto D = GeneralLabel::Dynamic;
constexpr auto V = GeneralLabel::Verification;

// Position-by-position scoring written without masks.
MetricSet oracle_score(const std::vector<Seg>& truth, const std::vector<Seg>& inferred) {
  MetricSet out;
  const auto truth_at = [&](std::size_t p) -> const Seg* {
    for (const auto& t : truth) if (p >= t.m && p <= t.n) return &t;
    return nullptr;
  };
  const auto slice_at = [&](std::size_t p) -> const Seg* {
    for (const auto& s : inferred) if (p >= s.m && p <= s.n) return &s;
    return nullptr;
  };
  const auto all_unused = [&](const Seg& s) {
    for (std::size_t p = s.m; p <= s.n; ++p) {
      const Seg* t = truth_at(p);
      if (!t || t->label != U) return false;
    }
    return true;
  };
  const auto inside_one = [&](const Seg& s) {
    for (const auto& t : truth) if (s.m >= t.m && s.n <= t.n) return true;
    return false;
  };
  for (const auto& t : truth) {
    for (std::size_t p = t.m; p <= t.n; ++p) {
      ++out.zeta.den;
      ++out.varpi.den;
      const Seg* s = slice_at(p);
      if (!s) continue;
      if (t.label == U ? all_unused(*s) : (s->m == t.m && s->n == t.n)) ++out.zeta.num;
      if (all_unused(*s) || inside_one(*s)) ++out.varpi.num;
    }
  }
  for (const auto& s : inferred) {
    std::map<int, std::size_t> votes;
    std::map<std::string, std::size_t> names;
    for (std::size_t p = s.m; p <= s.n; ++p) {
      const Seg* t = truth_at(p);
      if (!t || !t->label) continue;
      ++votes[static_cast<int>(*t->label)];
      ++names[t->name];
    }
    if (votes.empty()) continue;
    int best = votes.begin()->first;
    for (const auto& [k, v] : votes) if (v > votes[best]) best = k;
    ++out.xi_general.den;
    if (s.label && static_cast<int>(*s.label) == best) ++out.xi_general.num;
    if (s.label == D) {
      std::string top = names.begin()->first;
      for (const auto& [k, v] : names) if (v > names[top]) top = k;
      ++out.xi_descriptive.den;
      if (s.name == top) ++out.xi_descriptive.num;
    }
  }
  return out;
}

std::vector<Seg> random_tiling(std::mt19937_64& rng, std::size_t bits, bool annotate) {
  static const std::vector<std::string> kNames{"", "EngineSpeed", "VehicleSpeed"};
  const GeneralLabel all[] = {U, S, D, V};
  std::vector<Seg> out;
  std::size_t k = 1;
  while (k <= bits) {
    const std::size_t n = std::min(bits, k + (rng() % 3 == 0 ? rng() % 16 : rng() % 4));
    Seg s{k, n, all[rng() % 4], kNames[rng() % 3]};
    if (!annotate && rng() % 5 == 0) s.label.reset();
    out.push_back(s);
    k = n + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("identical inference scores one everywhere") {
  Case c;
  const std::vector<Seg> t{{1, 4, S, ""}, {5, 8, U, ""}, {9, 20, D, "EngineSpeed"}, {21, 24, V, ""}};
  add(c, 0x10, 3, t, t);
  const auto r = evaluate(c.inferred, c.truth);
  CHECK(r.total.zeta == Ratio{24, 24});
  CHECK(r.total.varpi == Ratio{24, 24});
  CHECK(r.total.xi_general == Ratio{4, 4});
  CHECK(r.total.xi_descriptive == Ratio{1, 1});
}

TEST_CASE("a signal split in two is covered but not bounded") {
  Case c;
  add(c, 0x10, 1, {{1, 8, D, ""}}, {{1, 4, D, ""}, {5, 8, D, ""}});
  const auto r = evaluate(c.inferred, c.truth);
  CHECK(r.total.zeta.value() == 0.0);
  CHECK(r.total.varpi.value() == 1.0);
}

TEST_CASE("a slice straddling two signals covers nothing") {
  Case c;
  add(c, 0x10, 2, {{1, 8, D, ""}, {9, 16, D, ""}}, {{1, 4, D, ""}, {5, 12, D, ""}, {13, 16, D, ""}});
  const auto r = evaluate(c.inferred, c.truth);
  CHECK(r.total.varpi == Ratio{8, 16});
  CHECK(r.total.zeta == Ratio{0, 16});
}

TEST_CASE("majority label over six dynamic and two unused bits") {
  Case c;
  add(c, 0x10, 1, {{1, 6, D, ""}, {7, 8, U, ""}}, {{1, 8, D, ""}});
  const auto r = evaluate(c.inferred, c.truth);
  CHECK(r.total.xi_general == Ratio{1, 1});
  CHECK(r.per_type.at("Dynamic").xi_general == Ratio{1, 1});
}

TEST_CASE("unused runs cut anywhere stay correct") {
  Case c;
  add(c, 0x10, 2, {{1, 5, U, ""}, {6, 16, D, ""}}, {{1, 2, U, ""}, {3, 5, V, ""}, {6, 16, D, ""}});
  const auto r = evaluate(c.inferred, c.truth);
  CHECK(r.total.zeta == Ratio{16, 16});
  CHECK(r.total.varpi == Ratio{16, 16});
  CHECK(r.total.xi_general == Ratio{2, 3});
  CHECK(r.per_length.at(1).zeta == Ratio{5, 5});
}

TEST_CASE("descriptive names are scored on dynamic slices only") {
  Case c;
  add(c, 0x10, 2, {{1, 8, D, "EngineSpeed"}, {9, 16, S, ""}},
      {{1, 8, D, "VehicleSpeed"}, {9, 16, D, ""}});
  const auto r = evaluate(c.inferred, c.truth);
  CHECK(r.total.xi_descriptive == Ratio{1, 2});
  CHECK(r.total.xi_general == Ratio{1, 2});
}

TEST_CASE("scores agree with a position by position oracle") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 300; ++trial) {
    Case c;
    MetricSet expected;
    const int ids = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < ids; ++i) {
      const std::size_t width = 1 + rng() % 8;
      const auto truth = random_tiling(rng, 8 * width, false);
      auto inferred = trial % 5 == 0 ? truth : random_tiling(rng, 8 * width, true);
      if (rng() % 4 == 0) inferred.pop_back();  // leave some bits without a slice
      expected += oracle_score(truth, inferred);
      add(c, 0x100 + i, width, truth, inferred);
    }
    const auto r = evaluate(c.inferred, c.truth, false);
    CHECK(r.total == expected);

    MetricSet summed;
    for (const auto& [key, m] : r.per_id) summed += m;
    CHECK(summed == r.total);
    MetricSet by_type;
    for (const auto& [key, m] : r.per_type) by_type += m;
    CHECK(by_type == r.total);
    MetricSet by_length;
    for (const auto& [key, m] : r.per_length) by_length += m;
    CHECK(by_length == r.total);

    for (const auto* ratio : {&r.total.zeta, &r.total.varpi, &r.total.xi_general}) {
      if (const auto v = ratio->value()) {
        CHECK(*v >= 0.0);
        CHECK(*v <= 1.0);
      }
    }

    // Renaming ids on both sides changes nothing.
    Case renamed;
    for (const auto& [key, msg] : c.truth.messages) {
      const std::uint32_t k2 = (0x7000 - key) | kExtendedFlag;
      auto m = msg;
      m.id = k2;
      renamed.truth.messages[k2] = m;
      auto im = c.inferred.at(key);
      im.key = k2;
      for (auto& s : im.slices) s.key = k2;
      renamed.inferred[k2] = im;
    }
    CHECK(evaluate(renamed.inferred, renamed.truth, false).total == r.total);
  }
}

TEST_CASE("perfect scores only for the exact answer") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 200; ++trial) {
    auto truth = random_tiling(rng, 16, true);
    for (auto& t : truth) t.label = t.label == U ? D : t.label;
    auto inferred = truth;
    if (trial % 2) {
      auto& s = inferred[rng() % inferred.size()];
      if (s.n > s.m) {
        const auto cut = s.m + (s.n - s.m) / 2;
        const Seg tail{cut + 1, s.n, s.label, s.name};
        s.n = cut;
        inferred.push_back(tail);
      } else if (inferred.size() > 1) {
        inferred.clear();
        inferred.push_back({1, 16, D, ""});
      }
    }
    Case c;
    add(c, 0x1, 2, truth, inferred);
    const auto r = evaluate(c.inferred, c.truth);
    const bool perfect = r.total.zeta.value() == 1.0 && r.total.varpi.value() == 1.0;
    bool same = inferred.size() == truth.size();
    CHECK(perfect == same);
  }
}

TEST_CASE("errors and bookkeeping") {
  Case c;
  add(c, 0x10, 1, {{1, 8, D, ""}}, {{1, 8, D, ""}});
  InferredMap other;
  other[0x20] = InferredMessage{0x20, 1, {}};
  try {
    evaluate(other, c.truth);
    FAIL("expected NoOverlap");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoOverlap);
  }

  Case bare;
  add(bare, 0x10, 1, {{1, 8, std::nullopt, ""}}, {{1, 8, D, ""}});
  try {
    evaluate(bare.inferred, bare.truth);
    FAIL("expected MissingAnnotations");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingAnnotations);
  }
  CHECK(evaluate(bare.inferred, bare.truth, false).total.xi_general.den == 0);

  Case mixed = c;
  add(mixed, 0x30, 1, {{1, 8, S, ""}}, {});
  mixed.inferred.erase(0x30);
  mixed.inferred[0x40] = InferredMessage{0x40, 1, {}};
  const auto r = evaluate(mixed.inferred, mixed.truth);
  CHECK(r.inferred_only == std::vector<std::uint32_t>{0x40});
  REQUIRE(r.untriggered.size() == 1);
  CHECK(r.untriggered[0].key == 0x30);
  CHECK(r.total.zeta == Ratio{8, 8});
}

TEST_CASE("report formats") {
  Case c;
  add(c, 0x10, 1, {{1, 4, D, ""}, {5, 8, S, ""}}, {{1, 4, D, ""}, {5, 8, V, ""}});
  const auto r = evaluate(c.inferred, c.truth);
  const auto j = nlohmann::json::parse(report_to_json(r));
  CHECK(j["format"] == "cansig.eval/1");
  CHECK(j["total"]["zeta"]["value"] == 1.0);
  CHECK(j["total"]["xi_general"]["num"] == 1);
  CHECK(j["per_id"][0]["can_id"] == "0x010");
  CHECK(report_per_id_csv(r) ==
        "can_id,truth_bits,zeta,varpi,xi_general_slices,xi_general,xi_descriptive_slices,xi_descriptive\n"
        "0x010,8,1.000000,1.000000,2,0.500000,1,1.000000\n");
  const auto table = report_table(r);
  CHECK(table.find("total") != std::string::npos);
  CHECK(table.find("50.00%") != std::string::npos);
}

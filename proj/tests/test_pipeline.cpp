#include "doctest.h"

#include "cansig/labeling.hpp"
#include "cansig/pipeline.hpp"
#include "cansig/slices_json.hpp"
#include "cansig/synth.hpp"

using namespace cansig;

namespace {

const SynthCorpus& corpus() {
  static const SynthCorpus c = generate_trace(default_spec(11, 8, 1500));
  return c;
}

const TraceMap& traces() {
  static const TraceMap t = group_by_id(corpus().trace);
  return t;
}

}  // namespace

TEST_CASE("diagnostic ids are not sliced") {
  const auto ids = signal_ids(traces());
  CHECK(ids.size() == 8);
  for (auto id : ids) CHECK_FALSE(is_diagnostic_id(id));
  CHECK(traces().contains(0x7DF));
  CHECK(traces().contains(0x7E8));
}

TEST_CASE("serial and parallel slicing agree") {
  const SliceParams params;
  for (int threads : {1, 2, 4}) {
    set_threads(threads);
    const auto serial = slice_all(traces(), params, Exec::Serial);
    const auto parallel = slice_all(traces(), params, Exec::Parallel);
    CHECK(serial.slices == parallel.slices);
    CHECK(serial.warnings == parallel.warnings);
    CHECK(serial.messages.size() == parallel.messages.size());
  }
  set_threads(0);
}

TEST_CASE("serial and parallel matching agree") {
  auto slices = slice_all(traces(), SliceParams{}).slices;
  label_slices(slices);
  auto a = slices;
  auto b = slices;
  set_threads(3);
  const auto wa = match_all(a, traces(), corpus().templates, {}, Exec::Serial);
  const auto wb = match_all(b, traces(), corpus().templates, {}, Exec::Parallel);
  set_threads(0);
  CHECK(a == b);
  CHECK(wa == wb);
  std::size_t matched = 0;
  for (const auto& s : a) {
    if (s.label == GeneralLabel::Dynamic) {
      CHECK(s.descriptive_label.has_value());
      CHECK(s.dtw_distance.has_value());
      ++matched;
    } else {
      CHECK_FALSE(s.descriptive_label.has_value());
    }
  }
  CHECK(matched > 0);
}

TEST_CASE("serial and parallel feature tables agree") {
  set_threads(2);
  const auto a = feature_tables(traces(), Exec::Serial);
  const auto b = feature_tables(traces(), Exec::Parallel);
  set_threads(0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].key == b[i].key);
    CHECK(a[i].frames == b[i].frames);
    REQUIRE(a[i].bytes.size() == b[i].bytes.size());
    REQUIRE(a[i].bits.size() == b[i].bits.size());
    for (std::size_t k = 0; k < a[i].bytes.size(); ++k) {
      CHECK(a[i].bytes[k].flip_rate == b[i].bytes[k].flip_rate);
      CHECK(a[i].bytes[k].mean == b[i].bytes[k].mean);
      CHECK(a[i].bytes[k].distinct_ratio == b[i].bytes[k].distinct_ratio);
    }
    for (std::size_t k = 0; k < a[i].bits.size(); ++k) {
      CHECK(a[i].bits[k].flip_rate == b[i].bits[k].flip_rate);
      CHECK(a[i].bits[k].mean == b[i].bits[k].mean);
    }
  }
}

TEST_CASE("slices tile every sliced payload") {
  const auto r = slice_all(traces(), SliceParams{});
  std::map<std::uint32_t, BitMask> covered;
  for (const auto& s : r.slices) {
    CHECK((covered[s.key] & s.mask()) == 0);
    covered[s.key] |= s.mask();
    CHECK(s.length() <= 16);
  }
  for (const auto& [key, info] : r.messages) CHECK(covered[key] == range_mask(1, 8 * info.width));
}

TEST_CASE("slices json round trip at every stage") {
  SliceDocument doc;
  const auto r = slice_all(traces(), SliceParams{});
  doc.slices = r.slices;
  doc.messages = r.messages;
  doc.warnings = {"a warning"};
  doc.params.slice.bit_level.eps = 0.75;
  doc.params.slice.bits.split_constant = false;

  auto back = read_slices_json(write_slices_json(doc));
  CHECK(back.stage == Stage::Sliced);
  CHECK(back.slices.size() == doc.slices.size());
  CHECK(back.params.slice.bit_level.eps == 0.75);
  CHECK_FALSE(back.params.slice.bits.split_constant);
  CHECK(back.warnings == doc.warnings);
  CHECK(write_slices_json(back) == write_slices_json(doc));

  doc.stage = Stage::Labeled;
  doc.eps0 = label_slices(doc.slices).eps0;
  back = read_slices_json(write_slices_json(doc));
  CHECK(back.eps0 == doc.eps0);
  for (std::size_t i = 0; i < doc.slices.size(); ++i) CHECK(back.slices[i].label == doc.slices[i].label);
  CHECK(write_slices_json(back) == write_slices_json(doc));

  doc.stage = Stage::Matched;
  doc.params.match.dtw.band = 12;
  match_all(doc.slices, traces(), corpus().templates, doc.params.match);
  back = read_slices_json(write_slices_json(doc));
  CHECK(back.params.match.dtw.band == 12u);
  CHECK(back.slices == doc.slices);
  CHECK(write_slices_json(back) == write_slices_json(doc));
}

TEST_CASE("malformed slices documents") {
  for (const char* text : {"", "{}", "{\"format\":\"cansig.slices/1\",\"stage\":\"bake\"}",
                           "{\"format\":\"cansig.slices/1\",\"stage\":\"slice\",\"params\":{},\"messages\":"
                           "[{\"can_id\":\"0x10\",\"frames\":3,\"width\":1,\"slices\":[{\"m\":0,\"n\":4}]}]}"}) {
    try {
      read_slices_json(text);
      FAIL("expected Format");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Format);
    }
  }
}

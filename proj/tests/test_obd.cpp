#include "doctest.h"

#include <random>

#include "cansig/obd.hpp"

using namespace cansig;

namespace {

Frame frame(double ts, std::uint32_t id, std::vector<std::uint8_t> bytes) {
  Frame f;
  f.timestamp = ts;
  f.can_id = id;
  f.dlc = static_cast<std::uint8_t>(bytes.size());
  std::copy(bytes.begin(), bytes.end(), f.data.begin());
  return f;
}

ObdSample sample(double ts, std::uint8_t p, double v) { return {ts, p, v}; }

}  // namespace

TEST_CASE("engine speed response decodes to rpm") {
  RawTrace t;
  t.frames.push_back(frame(1.0, 0x7E8, {0x04, 0x41, 0x0C, 0x1A, 0xF8}));
  const auto x = extract_obd_responses(t);
  REQUIRE(x.samples.size() == 1);
  CHECK(x.samples[0].pid == 0x0C);
  CHECK(x.samples[0].value == 1726.0);
  CHECK(x.samples[0].timestamp == 1.0);
}

TEST_CASE("vehicle speed response decodes to km/h") {
  RawTrace t;
  t.frames.push_back(frame(0.5, 0x7E9, {0x03, 0x41, 0x0D, 0x3C}));
  const auto x = extract_obd_responses(t);
  REQUIRE(x.samples.size() == 1);
  CHECK(x.samples[0].pid == 0x0D);
  CHECK(x.samples[0].value == 60.0);
}

TEST_CASE("only response ids are read") {
  RawTrace t;
  t.frames.push_back(frame(0.0, 0x123, {0x03, 0x41, 0x0D, 0x3C}));
  t.frames.push_back(frame(0.0, 0x7DF, {0x02, 0x01, 0x0D}));
  t.frames.push_back(frame(0.0, 0x7F0, {0x03, 0x41, 0x0D, 0x3C}));
  CHECK(extract_obd_responses(t).samples.empty());
}

TEST_CASE("unsupported and malformed responses are counted") {
  RawTrace t;
  t.frames.push_back(frame(0.0, 0x7E8, {0x03, 0x41, 0x05, 0x50}));        // coolant temp
  t.frames.push_back(frame(0.1, 0x7E8, {0x03, 0x41, 0x0C, 0x1A}));        // rpm needs two bytes
  t.frames.push_back(frame(0.2, 0x7E8, {0x07, 0x41, 0x0D}));              // length past payload
  t.frames.push_back(frame(0.3, 0x7E8, {0x03, 0x41, 0x11, 0x80, 0, 0}));  // fine
  const auto x = extract_obd_responses(t);
  CHECK(x.unsupported == 1);
  CHECK(x.malformed == 2);
  CHECK(x.warnings.size() == 1);
  REQUIRE(x.samples.size() == 1);
  CHECK(x.samples[0].value == doctest::Approx(50.196).epsilon(1e-4));
}

TEST_CASE("pid formulas") {
  const std::uint8_t zero[] = {0x00};
  const std::uint8_t ff[] = {0xFF, 0xFF};
  const std::uint8_t half[] = {0x80};
  CHECK(decode_pid(0x0D, zero) == 0.0);
  CHECK(decode_pid(0x0C, ff) == 16383.75);
  CHECK(std::abs(decode_pid(0x11, half) - 128.0 * 100.0 / 255.0) <= 1e-12);
  CHECK(decode_pid(0x11, half) == doctest::Approx(50.196).epsilon(1e-5));
  for (std::uint8_t p : {0x04, 0x45, 0x47, 0x48, 0x49, 0x4A, 0x4B}) CHECK(decode_pid(p, ff) == 100.0);
}

TEST_CASE("pid errors") {
  const std::uint8_t one[] = {0x12};
  try {
    decode_pid(0x05, one);
    FAIL("expected UnsupportedPid");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedPid);
  }
  try {
    decode_pid(0x0C, one);
    FAIL("expected ShortData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShortData);
  }
}

TEST_CASE("decoding never decreases when a data byte grows") {
  std::mt19937_64 rng(21);
  for (std::uint8_t p : {0x04, 0x0C, 0x0D, 0x11, 0x45, 0x47, 0x48, 0x49, 0x4A, 0x4B}) {
    for (int i = 0; i < 500; ++i) {
      std::uint8_t d[2] = {static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng())};
      const std::size_t which = rng() % pid_data_length(p);
      if (d[which] == 0xFF) continue;
      std::uint8_t up[2] = {d[0], d[1]};
      ++up[which];
      CHECK(decode_pid(p, up) >= decode_pid(p, d));
    }
  }
}

TEST_CASE("encode then decode stays within half a step") {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 1000; ++i) {
    const double rpm = std::uniform_real_distribution<double>(0, 16383.75)(rng);
    CHECK(std::abs(decode_pid(0x0C, encode_pid(0x0C, rpm)) - rpm) <= 0.125 + 1e-9);
    const double kmh = std::uniform_real_distribution<double>(0, 255)(rng);
    CHECK(std::abs(decode_pid(0x0D, encode_pid(0x0D, kmh)) - kmh) <= 0.5 + 1e-9);
    const double pct = std::uniform_real_distribution<double>(0, 100)(rng);
    CHECK(std::abs(decode_pid(0x11, encode_pid(0x11, pct)) - pct) <= 50.0 / 255.0 + 1e-9);
  }
}

TEST_CASE("ten speed samples make a ten point template") {
  std::vector<ObdSample> s;
  for (int i = 0; i < 10; ++i) s.push_back(sample(0.2 * i, 0x0D, i));
  const auto t = build_templates(s);
  REQUIRE(t.count("VehicleSpeed") == 1);
  CHECK(t.at("VehicleSpeed").size() == 10);
}

TEST_CASE("a single engine load sample is dropped") {
  std::vector<std::string> warnings;
  const std::vector<ObdSample> s{sample(0.0, 0x04, 40.0), sample(0.0, 0x0D, 1), sample(0.2, 0x0D, 2)};
  const auto t = build_templates(s, &warnings);
  CHECK(t.count("EngineLoad") == 0);
  CHECK(t.count("VehicleSpeed") == 1);
  CHECK(warnings.size() == 1);
}

TEST_CASE("throttle pids share one time ordered template") {
  const std::vector<ObdSample> s{sample(0.3, 0x47, 30), sample(0.1, 0x11, 10), sample(0.2, 0x47, 20),
                                 sample(0.0, 0x11, 0)};
  const auto t = build_templates(s);
  REQUIRE(t.size() == 1);
  const auto& th = t.at("ThrottlePosition");
  CHECK(th.timestamps == std::vector<double>{0.0, 0.1, 0.2, 0.3});
  CHECK(th.values == std::vector<double>{0, 10, 20, 30});
}

TEST_CASE("template csv round trip") {
  std::vector<ObdSample> s;
  for (int i = 0; i < 5; ++i) {
    s.push_back(sample(0.2 * i, 0x0C, 800 + 0.25 * i));
    s.push_back(sample(0.2 * i + 0.01, 0x0D, 3 * i));
  }
  const auto t = build_templates(s);
  const auto back = parse_template_csv(write_template_csv(t));
  REQUIRE(back.size() == t.size());
  for (const auto& [label, tpl] : t) {
    CHECK(back.at(label).timestamps == tpl.timestamps);
    CHECK(back.at(label).values == tpl.values);
  }
}

TEST_CASE("template csv accepts any column order and outside labels") {
  const auto t = parse_template_csv("label,value,timestamp\nWheelAngle,-3,0.0\nWheelAngle,4.5,0.1\nbad,row\n");
  REQUIRE(t.count("WheelAngle") == 1);
  CHECK(t.at("WheelAngle").values == std::vector<double>{-3, 4.5});
}

TEST_CASE("diagnostic ids") {
  CHECK(is_diagnostic_id(0x7DF));
  CHECK(is_diagnostic_id(0x7E8));
  CHECK(is_diagnostic_id(0x7E0));
  CHECK_FALSE(is_diagnostic_id(0x7F0));
  CHECK_FALSE(is_diagnostic_id(0x100));
  CHECK(is_diagnostic_id(0x18DAF110u | kExtendedFlag));
  CHECK_FALSE(is_diagnostic_id(0x18FF0009u | kExtendedFlag));
}

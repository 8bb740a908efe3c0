#include "cansig/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"
#include "text_util.hpp"

namespace cansig {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidSpec, what); }

std::uint64_t max_value(std::size_t len) {
  return len >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << len) - 1;
}

std::optional<std::uint8_t> pid_for_label(const std::string& label) {
  if (label == labels::kEngineSpeed) return pid::kEngineSpeed;
  if (label == labels::kVehicleSpeed) return pid::kVehicleSpeed;
  if (label == labels::kThrottlePosition) return pid::kThrottlePosition;
  if (label == labels::kEngineLoad) return pid::kEngineLoad;
  return std::nullopt;
}

// Payload as a 64-bit word, position 1 at the top bit.
void put_field(std::uint64_t& word, std::size_t first_bit, std::size_t len, std::uint64_t value) {
  const std::size_t shift = 64 - (first_bit + len - 1);
  const std::uint64_t mask = max_value(len) << shift;
  word = (word & ~mask) | ((value << shift) & mask);
}

std::uint64_t to_us(double seconds) { return static_cast<std::uint64_t>(std::llround(seconds * 1e6)); }

const char* kind_name(SignalKind k) {
  switch (k) {
    case SignalKind::Counter: return "counter";
    case SignalKind::Checksum: return "checksum";
    default: return "plain";
  }
}

std::uint32_t parse_key(const json& m) {
  std::uint64_t id = 0;
  const auto& v = m.at("id");
  if (v.is_string()) {
    const auto parsed = text::parse_hex(v.get<std::string>());
    if (!parsed) invalid("bad message id " + v.get<std::string>());
    id = *parsed;
  } else {
    id = v.get<std::uint64_t>();
  }
  const bool extended = m.value("extended", id > kMaxStandardId);
  if (id > (extended ? kMaxExtendedId : kMaxStandardId)) invalid("message id out of range");
  return message_key(static_cast<std::uint32_t>(id), extended);
}

}  // namespace

double Profile::at(double t) const {
  if (points.empty()) return 0.0;
  if (t <= points.front().first) return points.front().second;
  if (t >= points.back().first) return points.back().second;
  const auto hi = std::upper_bound(points.begin(), points.end(), t,
                                   [](double v, const auto& p) { return v < p.first; });
  const auto lo = hi - 1;
  const double span = hi->first - lo->first;
  if (span <= 0.0) return hi->second;
  return lo->second + (hi->second - lo->second) * (t - lo->first) / span;
}

void validate(const SynthSpec& spec) {
  if (!(spec.duration_s > 0.0)) invalid("duration must be positive");
  if (!(spec.obd_period_ms > 0.0)) invalid("OBD period must be positive");
  if (spec.switch_rate < 0.0) invalid("switch rate must not be negative");
  for (const auto& [label, p] : spec.profiles) {
    if (p.points.empty()) invalid("profile " + label + " has no points");
    for (std::size_t i = 1; i < p.points.size(); ++i) {
      if (p.points[i].first < p.points[i - 1].first) invalid("profile " + label + " is not time-ordered");
    }
  }
  std::map<std::uint32_t, int> seen;
  for (const auto& m : spec.messages) {
    const std::string id = format_id(m.key);
    if (++seen[m.key] > 1) invalid("duplicate message " + id);
    if (!(m.period_ms > 0.0)) invalid(id + ": period must be positive");
    if (m.dlc < 1 || m.dlc > kMaxPayload) invalid(id + ": dlc must be 1..8");
    BitMask covered = 0;
    for (const auto& s : m.signals) {
      const std::string where = id + " " + s.name;
      if (s.length < 1 || s.first_bit < 1 || s.last_bit() > 8 * m.dlc) invalid(where + ": outside payload");
      if ((covered & range_mask(s.first_bit, s.last_bit())) != 0) invalid(where + ": overlaps another signal");
      covered |= range_mask(s.first_bit, s.last_bit());
      if (s.initial > max_value(s.length)) invalid(where + ": initial value does not fit");
      if (s.category == GeneralLabel::Dynamic && !spec.profiles.contains(s.source)) {
        invalid(where + ": unknown profile '" + s.source + "'");
      }
      if (s.kind != SignalKind::Plain && s.category != GeneralLabel::Verification) {
        invalid(where + ": counters and checksums are Verification signals");
      }
      if (s.kind == SignalKind::Checksum && (s.length != 8 || (s.first_bit - 1) % 8 != 0)) {
        invalid(where + ": checksum must be one whole byte");
      }
    }
    if (covered != range_mask(1, 8 * m.dlc)) invalid(id + ": signals do not tile the payload");
  }
}

SynthSpec parse_synth_spec(std::string_view text) {
  SynthSpec spec;
  try {
    const json j = json::parse(text);
    spec.seed = j.value("seed", spec.seed);
    spec.duration_s = j.value("duration_s", spec.duration_s);
    spec.obd_period_ms = j.value("obd_period_ms", spec.obd_period_ms);
    spec.switch_rate = j.value("switch_rate", spec.switch_rate);
    if (j.contains("profiles")) {
      for (const auto& [label, pts] : j.at("profiles").items()) {
        Profile p;
        for (const auto& pt : pts) p.points.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
        spec.profiles.emplace(label, std::move(p));
      }
    }
    for (const auto& m : j.at("messages")) {
      SynthMessage msg;
      msg.key = parse_key(m);
      msg.period_ms = m.value("period_ms", msg.period_ms);
      msg.dlc = m.value("dlc", msg.dlc);
      for (const auto& s : m.at("signals")) {
        SynthSignal sig;
        sig.name = s.at("name").get<std::string>();
        sig.first_bit = s.at("start").get<std::size_t>();
        sig.length = s.at("length").get<std::size_t>();
        const auto category = parse_general_label(s.at("category").get<std::string>());
        if (!category) invalid(sig.name + ": unknown category");
        sig.category = *category;
        sig.source = s.value("source", "");
        sig.scale = s.value("scale", 1.0);
        sig.offset = s.value("offset", 0.0);
        sig.initial = s.value("initial", std::uint64_t{0});
        const auto kind = s.value("kind", std::string(sig.category == GeneralLabel::Verification ? "counter" : "plain"));
        if (kind == "counter") {
          sig.kind = SignalKind::Counter;
        } else if (kind == "checksum") {
          sig.kind = SignalKind::Checksum;
        } else if (kind != "plain") {
          invalid(sig.name + ": unknown kind '" + kind + "'");
        }
        msg.signals.push_back(std::move(sig));
      }
      spec.messages.push_back(std::move(msg));
    }
  } catch (const json::exception& e) {
    invalid(std::string("bad synth config: ") + e.what());
  }
  validate(spec);
  return spec;
}

std::string write_synth_spec(const SynthSpec& spec) {
  json j;
  j["seed"] = spec.seed;
  j["duration_s"] = spec.duration_s;
  j["obd_period_ms"] = spec.obd_period_ms;
  j["switch_rate"] = spec.switch_rate;
  j["profiles"] = json::object();
  for (const auto& [label, p] : spec.profiles) {
    auto& arr = j["profiles"][label] = json::array();
    for (const auto& [t, v] : p.points) arr.push_back({t, v});
  }
  auto& msgs = j["messages"] = json::array();
  for (const auto& m : spec.messages) {
    json jm;
    jm["id"] = format_id(m.key);
    if (m.key & kExtendedFlag) jm["extended"] = true;
    jm["period_ms"] = m.period_ms;
    jm["dlc"] = m.dlc;
    auto& sigs = jm["signals"] = json::array();
    for (const auto& s : m.signals) {
      json js{{"name", s.name}, {"start", s.first_bit}, {"length", s.length}, {"category", to_string(s.category)}};
      if (s.category == GeneralLabel::Dynamic) {
        js["source"] = s.source;
        js["scale"] = s.scale;
        js["offset"] = s.offset;
      }
      if (s.category == GeneralLabel::Verification) js["kind"] = kind_name(s.kind);
      if (s.initial != 0) js["initial"] = s.initial;
      sigs.push_back(std::move(js));
    }
    msgs.push_back(std::move(jm));
  }
  return j.dump(2) + "\n";
}

SynthSpec default_spec(std::uint64_t seed, std::size_t ids, std::size_t frames_per_id) {
  SynthSpec spec;
  spec.seed = seed;
  constexpr double period_ms = 10.0;
  spec.duration_s = static_cast<double>(frames_per_id) * period_ms / 1000.0;

  // A drive cycle on a 100 s clock, stretched to the duration.
  const double k = spec.duration_s / 100.0;
  const auto profile = [k](std::initializer_list<std::pair<double, double>> pts) {
    Profile p;
    for (const auto& [t, v] : pts) p.points.emplace_back(t * k, v);
    return p;
  };
  spec.profiles[labels::kVehicleSpeed] =
      profile({{0, 0}, {5, 0}, {20, 60}, {30, 60}, {45, 100}, {60, 40}, {70, 40}, {80, 75}, {95, 0}, {100, 0}});
  spec.profiles[labels::kEngineSpeed] =
      profile({{0, 800}, {5, 800}, {9, 3000}, {10, 1800}, {14, 3200}, {15, 2000}, {20, 2600}, {30, 2500},
               {33, 3500}, {34, 2300}, {45, 3100}, {50, 1500}, {60, 1200}, {70, 2200}, {75, 3000},
               {80, 2600}, {90, 1000}, {95, 800}, {100, 800}});
  spec.profiles[labels::kThrottlePosition] =
      profile({{0, 0}, {5, 0}, {6, 60}, {20, 40}, {22, 15}, {30, 15}, {32, 80}, {45, 70}, {46, 0}, {60, 0},
               {62, 20}, {70, 20}, {72, 55}, {80, 40}, {81, 0}, {100, 0}});

  using G = GeneralLabel;
  constexpr double kFill = 0.9;
  struct L {
    std::size_t first, len;
    G cat;
    const char* source = "";
    double scale = 1.0;
    SignalKind kind = SignalKind::Plain;
    std::uint64_t initial = 0;
  };
  // Dynamic fields are sized to their quantity: the profile peak lands near
  // the top of the bit range.
  const auto dyn = [&spec](std::size_t f, std::size_t n, const char* src) {
    double peak = 0.0;
    for (const auto& pt : spec.profiles.at(src).points) peak = std::max(peak, pt.second);
    return L{f, n, G::Dynamic, src, kFill * static_cast<double>(max_value(n)) / peak};
  };
  const auto unused = [](std::size_t f, std::size_t n, std::uint64_t value = 0) {
    return L{f, n, G::Unused, "", 1.0, SignalKind::Plain, value};
  };
  const auto sw = [](std::size_t f, std::size_t n) { return L{f, n, G::Switch}; };
  const auto counter = [](std::size_t f, std::size_t n) { return L{f, n, G::Verification, "", 1.0, SignalKind::Counter}; };
  const auto checksum = [](std::size_t f) { return L{f, 8, G::Verification, "", 1.0, SignalKind::Checksum}; };

  // Checksummed messages keep their counter in a high nibble, so the summed
  // bytes move by 16 every frame and jitter elsewhere cannot cancel it.
  const std::vector<std::vector<L>> layouts = {
      {dyn(1, 16, labels::kEngineSpeed), unused(17, 8), dyn(25, 8, labels::kThrottlePosition),
       unused(33, 16), counter(49, 4), unused(53, 4), checksum(57)},
      {dyn(1, 8, labels::kVehicleSpeed), unused(9, 16), sw(25, 1), unused(26, 7), unused(33, 24, 0x00A5C3),
       counter(57, 8)},
      {unused(1, 8), dyn(9, 8, labels::kVehicleSpeed), unused(17, 16), sw(33, 1), unused(34, 23),
       counter(57, 2), unused(59, 6)},
      {sw(1, 2), unused(3, 6), dyn(9, 12, labels::kVehicleSpeed), unused(21, 4), unused(25, 32),
       counter(57, 4), unused(61, 4)},
      {unused(1, 32, 0x12345678), sw(33, 1), unused(34, 7), sw(41, 1), unused(42, 19), counter(61, 4)},
      {dyn(1, 8, labels::kEngineSpeed), dyn(9, 8, labels::kThrottlePosition), unused(17, 16),
       sw(33, 3), unused(36, 21), counter(57, 8)},
      {counter(1, 4), unused(5, 4), dyn(9, 8, labels::kVehicleSpeed), unused(17, 8), sw(25, 2),
       unused(27, 30), checksum(57)},
      {unused(1, 16), dyn(17, 10, labels::kThrottlePosition), unused(27, 6), sw(33, 1), unused(34, 31)},
      {sw(1, 1), unused(2, 15), dyn(17, 16, labels::kVehicleSpeed), unused(33, 24), counter(57, 4),
       unused(61, 4)},
      {unused(1, 8, 0x5A), unused(9, 56)},
  };

  for (std::size_t i = 0; i < ids; ++i) {
    SynthMessage m;
    // The 29-bit case rides along on every tenth id.
    m.key = (i % 10 == 9) ? message_key(0x18FF0000u + static_cast<std::uint32_t>(i), true)
                          : static_cast<std::uint32_t>(0x100 + 0x20 * i);
    m.period_ms = period_ms;
    const auto& layout = layouts[i % layouts.size()];
    for (const auto& l : layout) {
      SynthSignal s;
      s.first_bit = l.first;
      s.length = l.len;
      s.category = l.cat;
      s.source = l.source;
      s.scale = l.scale;
      s.kind = l.kind;
      s.initial = l.initial;
      s.name = std::string("S") + std::to_string(l.first) + "_" + to_string(l.cat);
      if (!s.source.empty()) s.name += "_" + s.source;
      m.signals.push_back(std::move(s));
    }
    spec.messages.push_back(std::move(m));
  }
  validate(spec);
  return spec;
}

SynthCorpus generate_trace(const SynthSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> jitter(-1, 1);
  const std::uint64_t duration_us = to_us(spec.duration_s);

  struct Timed {
    std::uint64_t us;
    std::size_t order;
    Frame frame;
  };
  std::vector<Timed> timed;

  for (std::size_t mi = 0; mi < spec.messages.size(); ++mi) {
    const auto& m = spec.messages[mi];
    const std::uint64_t period_us = std::max<std::uint64_t>(1, to_us(m.period_ms / 1000.0));
    const std::uint64_t phase_us = (mi * 1373) % period_us;

    // Poisson toggle times per Switch signal; at least one toggle so the
    // signal is observable.
    std::vector<std::vector<std::uint64_t>> toggles(m.signals.size());
    std::vector<std::uint64_t> state(m.signals.size());
    for (std::size_t si = 0; si < m.signals.size(); ++si) {
      const auto& s = m.signals[si];
      state[si] = s.initial;
      if (s.category != GeneralLabel::Switch) continue;
      if (spec.switch_rate > 0.0) {
        std::exponential_distribution<double> gap(spec.switch_rate);
        for (double t = gap(rng); t < spec.duration_s; t += gap(rng)) toggles[si].push_back(to_us(t));
      }
      if (toggles[si].empty()) {
        toggles[si].push_back(std::uniform_int_distribution<std::uint64_t>(1, duration_us - 1)(rng));
      }
    }
    std::vector<std::size_t> next_toggle(m.signals.size(), 0);

    for (std::uint64_t us = phase_us; us < duration_us; us += period_us) {
      const double t = static_cast<double>(us) / 1e6;
      std::uint64_t word = 0;
      std::optional<std::size_t> checksum_bit;
      for (std::size_t si = 0; si < m.signals.size(); ++si) {
        const auto& s = m.signals[si];
        std::uint64_t v = 0;
        switch (s.category) {
          case GeneralLabel::Unused:
            v = s.initial;
            break;
          case GeneralLabel::Switch:
            while (next_toggle[si] < toggles[si].size() && toggles[si][next_toggle[si]] <= us) {
              ++next_toggle[si];
              if (s.length == 1) {
                state[si] ^= 1;
              } else {
                const auto draw = std::uniform_int_distribution<std::uint64_t>(0, max_value(s.length) - 1)(rng);
                state[si] = draw >= state[si] ? draw + 1 : draw;
              }
            }
            v = state[si];
            break;
          case GeneralLabel::Dynamic: {
            const double raw = std::round(s.scale * spec.profiles.at(s.source).at(t) + s.offset) + jitter(rng);
            v = static_cast<std::uint64_t>(std::clamp(raw, 0.0, static_cast<double>(max_value(s.length))));
            break;
          }
          case GeneralLabel::Verification:
            if (s.kind == SignalKind::Checksum) {
              checksum_bit = s.first_bit;
              continue;
            }
            v = state[si];
            state[si] = (state[si] + 1) & max_value(s.length);
            break;
        }
        put_field(word, s.first_bit, s.length, v);
      }
      Frame f;
      f.timestamp = static_cast<double>(us) / 1e6;
      f.can_id = m.key & ~kExtendedFlag;
      f.extended = (m.key & kExtendedFlag) != 0;
      f.dlc = static_cast<std::uint8_t>(m.dlc);
      for (std::size_t b = 0; b < kMaxPayload; ++b) f.data[b] = static_cast<std::uint8_t>(word >> (56 - 8 * b));
      if (checksum_bit) {
        const std::size_t cb = (*checksum_bit - 1) / 8;
        unsigned sum = 0;
        for (std::size_t b = 0; b < m.dlc; ++b) {
          if (b != cb) sum += f.data[b];
        }
        f.data[cb] = static_cast<std::uint8_t>(sum & 0xFF);
      }
      for (std::size_t b = m.dlc; b < kMaxPayload; ++b) f.data[b] = 0;
      timed.push_back({us, timed.size(), f});
    }
  }

  // OBD-II: one request/response pair per profiled PID every obd period,
  // staggered by 10 ms, the response 1.5 ms after its request.
  std::vector<std::uint8_t> pids;
  for (const auto& [label, p] : spec.profiles) {
    if (const auto id = pid_for_label(label)) pids.push_back(*id);
  }
  std::sort(pids.begin(), pids.end());
  const std::uint64_t obd_us = std::max<std::uint64_t>(1, to_us(spec.obd_period_ms / 1000.0));
  for (std::uint64_t base = 0; base < duration_us; base += obd_us) {
    for (std::size_t i = 0; i < pids.size(); ++i) {
      const std::uint64_t req_us = base + 10000 * i;
      const std::uint64_t resp_us = req_us + 1500;
      if (resp_us >= duration_us) continue;
      Frame req;
      req.timestamp = static_cast<double>(req_us) / 1e6;
      req.can_id = kObdRequestId;
      req.dlc = 8;
      req.data = {0x02, 0x01, pids[i], 0, 0, 0, 0, 0};
      timed.push_back({req_us, timed.size(), req});

      const double t = static_cast<double>(resp_us) / 1e6;
      const auto data = encode_pid(pids[i], spec.profiles.at(pid_label(pids[i])).at(t));
      Frame resp;
      resp.timestamp = t;
      resp.can_id = kObdResponseFirst;
      resp.dlc = 8;
      resp.data[0] = static_cast<std::uint8_t>(2 + data.size());
      resp.data[1] = kMode01Response;
      resp.data[2] = pids[i];
      std::copy(data.begin(), data.end(), resp.data.begin() + 3);
      timed.push_back({resp_us, timed.size(), resp});
    }
  }

  std::sort(timed.begin(), timed.end(),
            [](const Timed& a, const Timed& b) { return a.us != b.us ? a.us < b.us : a.order < b.order; });

  SynthCorpus out;
  out.trace.source = "synth";
  out.trace.frames.reserve(timed.size());
  for (auto& t : timed) out.trace.frames.push_back(t.frame);

  for (const auto& m : spec.messages) {
    MessageSpec msg;
    msg.id = m.key;
    msg.name = "MSG_" + format_id(m.key).substr(2);
    msg.dlc = static_cast<std::uint32_t>(m.dlc);
    for (const auto& s : m.signals) {
      SignalSpec sig;
      sig.message_id = m.key;
      sig.name = s.name;
      sig.start_bit = sequential_to_dbc(s.first_bit);
      sig.length = static_cast<std::uint32_t>(s.length);
      sig.maximum = static_cast<double>(max_value(s.length));
      if (s.category == GeneralLabel::Dynamic && s.scale != 0.0) {
        sig.scale = 1.0 / s.scale;
        sig.offset = -s.offset / s.scale;
        sig.maximum = sig.maximum * sig.scale + sig.offset;
        sig.minimum = sig.offset;
      }
      sig.category = s.category;
      if (s.category == GeneralLabel::Dynamic) sig.descriptive = s.source;
      msg.signals.push_back(std::move(sig));
    }
    out.truth.messages.emplace(m.key, std::move(msg));
  }
  out.truth.provenance = "synth seed " + std::to_string(spec.seed);

  const auto obd = extract_obd_responses(out.trace);
  out.templates = build_templates(obd.samples);
  return out;
}

void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  const auto put = [&](const char* name, const std::string& content) {
    std::ofstream os(dir / name, std::ios::binary);
    os << content;
    if (!os) throw Error(ErrorCode::Io, "cannot write " + (dir / name).string());
  };
  put("trace.log", to_candump(corpus.trace));
  put("truth.dbc", write_dbc(corpus.truth));
  put("truth.csv", write_annotations(corpus.truth));
  put("templates.csv", write_template_csv(corpus.templates));
}

}  // namespace cansig

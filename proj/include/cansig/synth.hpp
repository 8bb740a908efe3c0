#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cansig/dbc.hpp"
#include "cansig/obd.hpp"
#include "cansig/slice.hpp"
#include "cansig/trace.hpp"

namespace cansig {

// Piecewise-linear trajectory through (time s, value) points; held constant
// outside the first and last point.
struct Profile {
  std::vector<std::pair<double, double>> points;

  double at(double t) const;
};

enum class SignalKind { Plain, Counter, Checksum };

struct SynthSignal {
  std::string name;
  std::size_t first_bit = 1;  // MSB-first, 1-based
  std::size_t length = 1;
  GeneralLabel category = GeneralLabel::Unused;
  // Dynamic: raw = round(scale * profile(t) + offset) plus jitter in {-1,0,1}.
  std::string source;
  double scale = 1.0;
  double offset = 0.0;
  // Verification signals are counters unless marked as checksums; a
  // checksum is one whole byte holding the sum of the other bytes mod 256.
  SignalKind kind = SignalKind::Plain;
  std::uint64_t initial = 0;  // Unused constant, Switch and counter start value

  std::size_t last_bit() const noexcept { return first_bit + length - 1; }
};

struct SynthMessage {
  std::uint32_t key = 0;
  double period_ms = 10.0;
  std::size_t dlc = 8;
  std::vector<SynthSignal> signals;
};

struct SynthSpec {
  std::uint64_t seed = 1;
  double duration_s = 100.0;
  double obd_period_ms = 200.0;
  double switch_rate = 0.05;  // toggles per second per Switch signal
  std::map<std::string, Profile> profiles;  // keyed by descriptive label
  std::vector<SynthMessage> messages;
};

// Throws InvalidSpec unless every layout tiles its payload, periods and the
// duration are positive, Dynamic sources name a profile and checksums are
// whole bytes.
void validate(const SynthSpec& spec);

// JSON config; see docs/schema.md.
SynthSpec parse_synth_spec(std::string_view json);
std::string write_synth_spec(const SynthSpec& spec);

// The 20-id corpus used by the acceptance run: mixed layouts, period 10 ms,
// frames_per_id frames per id.
SynthSpec default_spec(std::uint64_t seed, std::size_t ids = 20, std::size_t frames_per_id = 10000);

struct SynthCorpus {
  RawTrace trace;
  GroundTruth truth;  // annotated with categories and descriptive labels
  TemplateSet templates;
};

// Deterministic for a given spec (seed included).
SynthCorpus generate_trace(const SynthSpec& spec);

// trace.log, truth.dbc, truth.csv and templates.csv under dir.
void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace cansig

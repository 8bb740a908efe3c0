#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cansig/error.hpp"
#include "cansig/slice.hpp"

namespace cansig {

enum class ByteOrder { BigEndian, LittleEndian };

// One SG_ line. start_bit and byte_order keep DBC conventions; mask() gives
// the covered payload positions in the toolkit's MSB-first numbering.
struct SignalSpec {
  std::uint32_t message_id = 0;
  std::string name;
  std::uint32_t start_bit = 0;
  std::uint32_t length = 1;
  ByteOrder byte_order = ByteOrder::BigEndian;
  bool is_signed = false;
  double scale = 1.0;
  double offset = 0.0;
  double minimum = 0.0;
  double maximum = 0.0;
  std::string unit;
  std::string comment;
  std::optional<GeneralLabel> category;      // from the annotation sidecar
  std::optional<std::string> descriptive;  // from the annotation sidecar

  BitMask mask() const;
};

struct MessageSpec {
  std::uint32_t id = 0;  // bit 31 set for extended ids, as in DBC files
  std::string name;
  std::uint32_t dlc = 8;
  std::string transmitter = "Vector__XXX";
  std::string comment;
  std::vector<SignalSpec> signals;
};

struct GroundTruth {
  std::map<std::uint32_t, MessageSpec> messages;
  std::vector<Warning> warnings;
  std::string provenance;
};

// DBC numbers bits LSB-first within each byte (bit 7 is the MSB of byte 0);
// the toolkit numbers them 1..64 MSB-first.
constexpr std::size_t dbc_to_sequential(std::uint32_t dbc_bit) {
  return (dbc_bit / 8) * 8 + (7 - dbc_bit % 8) + 1;
}
constexpr std::uint32_t sequential_to_dbc(std::size_t position) {
  return static_cast<std::uint32_t>(((position - 1) / 8) * 8 + 7 - (position - 1) % 8);
}

// Contiguous [first, last] positions of a mask, if the mask is one run.
std::optional<std::pair<std::size_t, std::size_t>> mask_range(BitMask mask);

// Reads VERSION/BO_/SG_/CM_ (other sections are skipped). Bad SG_ lines and
// out-of-payload signals become warnings. Throws NoDefinitions without BO_.
GroundTruth parse_dbc(std::string_view text);

std::string write_dbc(const GroundTruth& truth);

// Sidecar CSV `signal_name,category[,descriptive]`; the header row is
// optional. Matches signals by name across all messages.
void apply_annotations(GroundTruth& truth, std::string_view csv);
std::string write_annotations(const GroundTruth& truth);

// Pairs of signals sharing payload bits, one message per entry.
std::vector<std::string> find_overlaps(const GroundTruth& truth);

// Slicing result of one message, as written to and read back from DBC.
struct InferredMessage {
  std::uint32_t key = 0;
  std::size_t width = 8;  // payload bytes
  std::vector<SignalSlice> slices;
};

using InferredMap = std::map<std::uint32_t, InferredMessage>;

// Groups slices by message key, keeping their order.
InferredMap group_slices(std::span<const SignalSlice> slices,
                         const std::map<std::uint32_t, std::size_t>& widths);

// One BO_ per message and one big-endian SG_ named SIG_<m>_<n>_<label> per
// slice that is not Unused. Unused ranges and descriptive labels travel in
// CM_ comments so inferred_from_dbc can restore the exact slice set.
std::string emit_dbc(const InferredMap& inferred);

// Reverse of emit_dbc. DBC files from elsewhere are accepted too: signal
// ranges come from the SG_ masks, categories from annotations, and payload
// bits no signal covers become Unused slices.
InferredMap inferred_from_dbc(const GroundTruth& dbc);

}  // namespace cansig

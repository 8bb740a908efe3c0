#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cansig/dbc.hpp"

namespace cansig {

struct Ratio {
  std::size_t num = 0;
  std::size_t den = 0;

  // nullopt for an empty denominator.
  std::optional<double> value() const {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  }
  Ratio& operator+=(const Ratio& o) {
    num += o.num;
    den += o.den;
    return *this;
  }
  bool operator==(const Ratio&) const = default;
};

// zeta and varpi count bits (denominator: ground-truth signal bits), the two
// xi ratios count slices.
struct MetricSet {
  Ratio zeta;
  Ratio varpi;
  Ratio xi_general;
  Ratio xi_descriptive;

  MetricSet& operator+=(const MetricSet& o) {
    zeta += o.zeta;
    varpi += o.varpi;
    xi_general += o.xi_general;
    xi_descriptive += o.xi_descriptive;
    return *this;
  }
  bool operator==(const MetricSet&) const = default;
};

// One ground-truth signal nobody saw: its id is missing from the trace.
struct UntriggeredSignal {
  std::uint32_t key = 0;
  std::string name;
};

struct EvalReport {
  MetricSet total;
  std::map<std::uint32_t, MetricSet> per_id;
  // Keyed by the ground-truth category ("unannotated" when missing); slice
  // ratios go under the slice's majority category.
  std::map<std::string, MetricSet> per_type;
  // Keyed by ground-truth signal length (Unused bits count as length 1); xi
  // goes under the inferred slice length instead.
  std::map<std::size_t, MetricSet> per_length;
  std::vector<std::uint32_t> inferred_only;  // ids without ground truth
  std::vector<UntriggeredSignal> untriggered;
};

// Scores inferred slices against ground truth on the ids both sides share.
//
// zeta: a ground-truth bit counts when some inferred slice has exactly its
// signal's bit set. varpi: bits of inferred slices that fit inside one
// ground-truth signal. Unused signals are scored bit by bit: a slice made of
// Unused bits only bounds and covers every bit it holds, however the Unused
// runs were cut. xi_general: slices whose label equals the majority
// category of the ground-truth bits under them (ties go to the earlier
// category; slices over no annotated bit are skipped). xi_descriptive: the
// same over slices labeled Dynamic, with missing descriptive names counting
// as the empty name.
//
// Throws NoOverlap when no id is shared and MissingAnnotations when require
// is set and no shared signal has a category.
EvalReport evaluate(const InferredMap& inferred, const GroundTruth& truth,
                    bool require_annotations = true);

std::string report_to_json(const EvalReport& report);
std::string report_per_id_csv(const EvalReport& report);
std::string report_table(const EvalReport& report);

}  // namespace cansig

#include "cansig/eval.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <sstream>

#include "cansig/trace.hpp"
#include "json.hpp"

namespace cansig {

namespace {

constexpr const char* kUnannotated = "unannotated";

std::size_t bits(BitMask m) { return static_cast<std::size_t>(std::popcount(m)); }

struct TruthSignal {
  BitMask mask = 0;
  std::size_t length = 0;
  std::optional<GeneralLabel> category;
  std::string descriptive;
};

std::string type_key(const std::optional<GeneralLabel>& c) {
  return c ? to_string(*c) : kUnannotated;
}

std::vector<TruthSignal> truth_signals(const MessageSpec& msg, bool& annotated) {
  std::vector<TruthSignal> out;
  for (const auto& sig : msg.signals) {
    TruthSignal t;
    t.mask = sig.mask();
    t.length = sig.length;
    t.category = sig.category;
    t.descriptive = sig.descriptive.value_or("");
    if (sig.category) annotated = true;
    out.push_back(std::move(t));
  }
  return out;
}

bool is_unused(const TruthSignal& t) { return t.category == GeneralLabel::Unused; }

void score_message(const InferredMessage& inferred, const std::vector<TruthSignal>& truth,
                   EvalReport& report) {
  MetricSet& id_metrics = report.per_id[inferred.key];
  // Unused bits count as 1-bit signals each, so any slice made only of
  // Unused bits bounds them correctly.
  BitMask unused = 0;
  for (const auto& t : truth) {
    if (is_unused(t)) unused |= t.mask;
  }
  const auto add_bits = [&](const TruthSignal& t, Ratio MetricSet::*metric, const Ratio& r) {
    id_metrics.*metric += r;
    report.per_type[type_key(t.category)].*metric += r;
    report.per_length[is_unused(t) ? 1 : t.length].*metric += r;
  };

  for (const auto& t : truth) {
    Ratio z{0, bits(t.mask)};
    if (is_unused(t)) {
      for (const auto& s : inferred.slices) {
        if ((s.mask() & ~unused) == 0) z.num += bits(s.mask() & t.mask);
      }
    } else {
      for (const auto& s : inferred.slices) {
        if (s.mask() == t.mask) {
          z.num = bits(t.mask);
          break;
        }
      }
    }
    add_bits(t, &MetricSet::zeta, z);
    add_bits(t, &MetricSet::varpi, Ratio{0, bits(t.mask)});
  }

  for (const auto& s : inferred.slices) {
    const BitMask sm = s.mask();
    if ((sm & ~unused) == 0) {
      // Spread over the Unused signals it touches.
      for (const auto& t : truth) {
        if (is_unused(t) && (sm & t.mask) != 0) add_bits(t, &MetricSet::varpi, Ratio{bits(sm & t.mask), 0});
      }
    } else {
      for (const auto& t : truth) {
        if ((sm & ~t.mask) == 0) {
          add_bits(t, &MetricSet::varpi, Ratio{bits(sm), 0});
          break;
        }
      }
    }

    std::array<std::size_t, 4> votes{};
    std::map<std::string, std::size_t> names;
    std::size_t annotated_bits = 0;
    for (const auto& t : truth) {
      const std::size_t overlap = bits(sm & t.mask);
      if (overlap == 0 || !t.category) continue;
      votes[static_cast<std::size_t>(*t.category)] += overlap;
      names[t.descriptive] += overlap;
      annotated_bits += overlap;
    }
    if (annotated_bits == 0) continue;

    std::size_t best = 0;
    for (std::size_t i = 1; i < votes.size(); ++i) {
      if (votes[i] > votes[best]) best = i;
    }
    const auto majority = static_cast<GeneralLabel>(best);
    const Ratio general{s.label == majority ? 1u : 0u, 1};
    id_metrics.xi_general += general;
    report.per_type[to_string(majority)].xi_general += general;
    report.per_length[s.length()].xi_general += general;

    if (s.label == GeneralLabel::Dynamic) {
      // std::map order breaks ties towards the name that sorts first.
      auto top = names.begin();
      for (auto it = names.begin(); it != names.end(); ++it) {
        if (it->second > top->second) top = it;
      }
      const Ratio desc{s.descriptive_label.value_or("") == top->first ? 1u : 0u, 1};
      id_metrics.xi_descriptive += desc;
      report.per_type[to_string(majority)].xi_descriptive += desc;
      report.per_length[s.length()].xi_descriptive += desc;
    }
  }
  report.total += id_metrics;
}

nlohmann::json ratio_json(const Ratio& r) {
  nlohmann::json j;
  j["num"] = r.num;
  j["den"] = r.den;
  const auto v = r.value();
  j["value"] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json metrics_json(const MetricSet& m) {
  return {{"zeta", ratio_json(m.zeta)},
          {"varpi", ratio_json(m.varpi)},
          {"xi_general", ratio_json(m.xi_general)},
          {"xi_descriptive", ratio_json(m.xi_descriptive)}};
}

std::string pct(const Ratio& r) {
  const auto v = r.value();
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * *v);
  return buf;
}

std::string plain(const Ratio& r) {
  const auto v = r.value();
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

}  // namespace

EvalReport evaluate(const InferredMap& inferred, const GroundTruth& truth, bool require_annotations) {
  EvalReport report;
  bool shared = false;
  bool annotated = false;
  std::map<std::uint32_t, std::vector<TruthSignal>> prepared;
  for (const auto& [key, msg] : truth.messages) {
    if (inferred.contains(key)) {
      prepared.emplace(key, truth_signals(msg, annotated));
      shared = true;
    } else {
      for (const auto& sig : msg.signals) report.untriggered.push_back({key, sig.name});
    }
  }
  for (const auto& [key, msg] : inferred) {
    if (!truth.messages.contains(key)) report.inferred_only.push_back(key);
  }
  if (!shared) throw Error(ErrorCode::NoOverlap, "inferred and ground-truth ids are disjoint");
  if (require_annotations && !annotated) {
    throw Error(ErrorCode::MissingAnnotations, "ground truth carries no signal categories");
  }
  for (const auto& [key, signals] : prepared) score_message(inferred.at(key), signals, report);
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["format"] = "cansig.eval/1";
  j["total"] = metrics_json(report.total);
  auto& ids = j["per_id"] = nlohmann::json::array();
  for (const auto& [key, m] : report.per_id) {
    auto e = metrics_json(m);
    e["can_id"] = format_id(key);
    ids.push_back(std::move(e));
  }
  auto& types = j["per_type"] = nlohmann::json::object();
  for (const auto& [name, m] : report.per_type) types[name] = metrics_json(m);
  auto& lengths = j["per_length"] = nlohmann::json::array();
  for (const auto& [len, m] : report.per_length) {
    auto e = metrics_json(m);
    e["length"] = len;
    lengths.push_back(std::move(e));
  }
  auto& only = j["inferred_only"] = nlohmann::json::array();
  for (auto key : report.inferred_only) only.push_back(format_id(key));
  auto& untriggered = j["untriggered"] = nlohmann::json::array();
  for (const auto& u : report.untriggered) {
    untriggered.push_back({{"can_id", format_id(u.key)}, {"signal", u.name}});
  }
  return j.dump(2) + "\n";
}

std::string report_per_id_csv(const EvalReport& report) {
  std::ostringstream os;
  os << "can_id,truth_bits,zeta,varpi,xi_general_slices,xi_general,xi_descriptive_slices,"
        "xi_descriptive\n";
  for (const auto& [key, m] : report.per_id) {
    os << format_id(key) << ',' << m.zeta.den << ',' << plain(m.zeta) << ',' << plain(m.varpi) << ','
       << m.xi_general.den << ',' << plain(m.xi_general) << ',' << m.xi_descriptive.den << ','
       << plain(m.xi_descriptive) << '\n';
  }
  return os.str();
}

std::string report_table(const EvalReport& report) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %10s %10s %10s %10s\n", "can_id", "zeta", "varpi", "xi_gen",
                "xi_desc");
  os << line;
  const auto row = [&](const std::string& name, const MetricSet& m) {
    std::snprintf(line, sizeof line, "%-12s %10s %10s %10s %10s\n", name.c_str(), pct(m.zeta).c_str(),
                  pct(m.varpi).c_str(), pct(m.xi_general).c_str(), pct(m.xi_descriptive).c_str());
    os << line;
  };
  for (const auto& [key, m] : report.per_id) row(format_id(key), m);
  row("total", report.total);
  if (!report.untriggered.empty()) {
    os << report.untriggered.size() << " ground-truth signal(s) on ids absent from the trace\n";
  }
  return os.str();
}

}  // namespace cansig

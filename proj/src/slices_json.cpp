#include "cansig/slices_json.hpp"

#include "json.hpp"
#include "text_util.hpp"

namespace cansig {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "cansig.slices/1";

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::Labeled: return "label";
    case Stage::Matched: return "match";
    default: return "slice";
  }
}

Stage parse_stage(const std::string& s) {
  if (s == "slice") return Stage::Sliced;
  if (s == "label") return Stage::Labeled;
  if (s == "match") return Stage::Matched;
  throw Error(ErrorCode::Format, "unknown stage '" + s + "'");
}

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> read_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

json params_json(const PipelineParams& p, Stage stage) {
  json j;
  j["eps_byte"] = p.slice.byte_level.eps;
  j["min_pts_byte"] = p.slice.byte_level.min_pts;
  j["eps_bit"] = p.slice.bit_level.eps;
  j["min_pts_bit"] = p.slice.bit_level.min_pts;
  j["standardize_bits"] = p.slice.bits.standardize;
  j["split_constant_bits"] = p.slice.bits.split_constant;
  if (stage >= Stage::Labeled) j["eps0_override"] = opt(p.eps0_override);
  if (stage >= Stage::Matched) {
    j["dtw_normalize"] = p.match.dtw.normalize;
    j["dtw_band"] = opt(p.match.dtw.band);
    j["max_series"] = p.match.max_series;
    j["max_dtw"] = opt(p.match.max_distance);
  }
  return j;
}

PipelineParams read_params(const json& j) {
  PipelineParams p;
  p.slice.byte_level.eps = j.value("eps_byte", p.slice.byte_level.eps);
  p.slice.byte_level.min_pts = j.value("min_pts_byte", p.slice.byte_level.min_pts);
  p.slice.bit_level.eps = j.value("eps_bit", p.slice.bit_level.eps);
  p.slice.bit_level.min_pts = j.value("min_pts_bit", p.slice.bit_level.min_pts);
  p.slice.bits.standardize = j.value("standardize_bits", p.slice.bits.standardize);
  p.slice.bits.split_constant = j.value("split_constant_bits", p.slice.bits.split_constant);
  p.eps0_override = read_opt<double>(j, "eps0_override");
  p.match.dtw.normalize = j.value("dtw_normalize", p.match.dtw.normalize);
  p.match.dtw.band = read_opt<std::size_t>(j, "dtw_band");
  p.match.max_series = j.value("max_series", p.match.max_series);
  p.match.max_distance = read_opt<double>(j, "max_dtw");
  return p;
}

}  // namespace

std::string write_slices_json(const SliceDocument& doc) {
  json j;
  j["format"] = kFormat;
  j["stage"] = stage_name(doc.stage);
  j["params"] = params_json(doc.params, doc.stage);
  if (doc.stage >= Stage::Labeled) j["eps0"] = opt(doc.eps0);

  std::map<std::uint32_t, json> by_key;
  for (const auto& [key, info] : doc.messages) {
    by_key[key] = {{"can_id", format_id(key)},
                   {"extended", (key & kExtendedFlag) != 0},
                   {"frames", info.frames},
                   {"width", info.width},
                   {"slices", json::array()}};
  }
  for (const auto& s : doc.slices) {
    auto it = by_key.find(s.key);
    if (it == by_key.end()) throw Error(ErrorCode::Format, "slice on undeclared id " + format_id(s.key));
    json js{{"m", s.first_bit},
            {"n", s.last_bit},
            {"b", s.features.flip_rate},
            {"a", s.features.mean},
            {"u", s.features.distinct_ratio},
            {"distinct", s.features.distinct}};
    if (doc.stage >= Stage::Labeled) {
      js["theta"] = s.theta;
      js["label"] = s.label ? json(to_string(*s.label)) : json(nullptr);
    }
    if (doc.stage >= Stage::Matched && s.label == GeneralLabel::Dynamic) {
      js["descriptive_label"] = opt(s.descriptive_label);
      js["dtw_distance"] = opt(s.dtw_distance);
    }
    it->second["slices"].push_back(std::move(js));
  }
  auto& msgs = j["messages"] = json::array();
  for (auto& [key, m] : by_key) msgs.push_back(std::move(m));
  j["warnings"] = doc.warnings;
  return j.dump(2) + "\n";
}

SliceDocument read_slices_json(std::string_view text) {
  SliceDocument doc;
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != kFormat) throw Error(ErrorCode::Format, "not a cansig.slices/1 document");
    doc.stage = parse_stage(j.at("stage").get<std::string>());
    doc.params = read_params(j.at("params"));
    doc.eps0 = read_opt<double>(j, "eps0");
    for (const auto& m : j.at("messages")) {
      const auto id = text::parse_hex(m.at("can_id").get<std::string>());
      if (!id) throw Error(ErrorCode::Format, "bad can_id");
      const std::uint32_t key = message_key(static_cast<std::uint32_t>(*id), m.value("extended", false));
      doc.messages[key] = {m.at("frames").get<std::size_t>(), m.at("width").get<std::size_t>()};
      for (const auto& js : m.at("slices")) {
        SignalSlice s;
        s.key = key;
        s.first_bit = js.at("m").get<std::size_t>();
        s.last_bit = js.at("n").get<std::size_t>();
        if (s.first_bit < 1 || s.last_bit < s.first_bit || s.last_bit > 64) {
          throw Error(ErrorCode::Format, "slice range out of payload");
        }
        s.features.flip_rate = js.at("b").get<double>();
        s.features.mean = js.at("a").get<double>();
        s.features.distinct_ratio = js.at("u").get<double>();
        s.features.distinct = js.value("distinct", std::size_t{0});
        s.theta = js.value("theta", 0.0);
        if (const auto label = read_opt<std::string>(js, "label")) {
          s.label = parse_general_label(*label);
          if (!s.label) throw Error(ErrorCode::Format, "unknown label '" + *label + "'");
        }
        s.descriptive_label = read_opt<std::string>(js, "descriptive_label");
        s.dtw_distance = read_opt<double>(js, "dtw_distance");
        doc.slices.push_back(std::move(s));
      }
    }
    if (j.contains("warnings")) doc.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad slices document: ") + e.what());
  }
  return doc;
}

}  // namespace cansig

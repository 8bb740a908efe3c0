#include "cansig/dbc.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>

#include "cansig/trace.hpp"
#include "text_util.hpp"

namespace cansig {

namespace {

constexpr std::size_t kPayloadBits = 64;
constexpr std::string_view kUnusedTag = "cansig unused=";
constexpr std::string_view kDescriptiveTag = "descriptive=";
constexpr std::string_view kDtwTag = "dtw=";

std::string num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::optional<BitMask> try_mask(const SignalSpec& s) {
  if (s.length == 0 || s.length > kPayloadBits) return std::nullopt;
  BitMask m = 0;
  if (s.byte_order == ByteOrder::BigEndian) {
    if (s.start_bit >= kPayloadBits) return std::nullopt;
    const std::size_t first = dbc_to_sequential(s.start_bit);
    const std::size_t last = first + s.length - 1;
    if (last > kPayloadBits) return std::nullopt;
    return range_mask(first, last);
  }
  for (std::uint32_t i = 0; i < s.length; ++i) {
    const std::uint32_t b = s.start_bit + i;
    if (b >= kPayloadBits) return std::nullopt;
    m |= BitMask{1} << (dbc_to_sequential(b) - 1);
  }
  return m;
}

// Quote-aware check that a CM_ statement is complete.
bool statement_complete(std::string_view s) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && in_quotes) {
      ++i;
    } else if (s[i] == '"') {
      in_quotes = !in_quotes;
    } else if (s[i] == ';' && !in_quotes) {
      return true;
    }
  }
  return false;
}

std::string sanitize_comment(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), '"', '\'');
  return out;
}

std::string_view tag_value(std::string_view comment, std::string_view tag) {
  const auto pos = comment.find(tag);
  if (pos == std::string_view::npos) return {};
  auto rest = comment.substr(pos + tag.size());
  const auto end = rest.find_first_of("; \n");
  return end == std::string_view::npos ? rest : rest.substr(0, end);
}

std::vector<std::pair<std::size_t, std::size_t>> mask_runs(BitMask mask) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t k = 1;
  while (k <= kPayloadBits) {
    if (!(mask >> (k - 1) & 1)) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end < kPayloadBits && (mask >> end & 1)) ++end;
    runs.emplace_back(k, end);
    k = end + 1;
  }
  return runs;
}

std::optional<GeneralLabel> parse_label_loose(std::string_view s) {
  const auto wanted = text::lower(text::trim(s));
  for (auto l : {GeneralLabel::Unused, GeneralLabel::Switch, GeneralLabel::Dynamic,
                 GeneralLabel::Verification}) {
    if (text::lower(to_string(l)) == wanted) return l;
  }
  return std::nullopt;
}

}  // namespace

BitMask SignalSpec::mask() const {
  const auto m = try_mask(*this);
  if (!m) throw Error(ErrorCode::InvalidRange, "signal " + name + " lies outside an 8-byte payload");
  return *m;
}

std::optional<std::pair<std::size_t, std::size_t>> mask_range(BitMask mask) {
  if (mask == 0) return std::nullopt;
  const std::size_t first = static_cast<std::size_t>(std::countr_zero(mask)) + 1;
  const std::size_t last = kPayloadBits - static_cast<std::size_t>(std::countl_zero(mask));
  if (range_mask(first, last) != mask) return std::nullopt;
  return std::make_pair(first, last);
}

GroundTruth parse_dbc(std::string_view content) {
  static const std::regex bo_re(R"(^BO_\s+(\d+)\s+(\w+)\s*:\s*(\d+)\s*(\w*))");
  static const std::regex sg_re(
      R"(^SG_\s+(\w+)\s*(M|m\d+)?\s*:\s*(\d+)\|(\d+)@([01])([+-])\s*\(\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\)\s*\[\s*([^|\s]+)\s*\|\s*([^\]\s]+)\s*\]\s*\"([^\"]*)\"\s*(.*)$)");
  static const std::regex cm_sg_re(R"(^CM_\s+SG_\s+(\d+)\s+(\w+)\s+\"((?:[^\"\\]|\\.)*)\"\s*;)");
  static const std::regex cm_bo_re(R"(^CM_\s+BO_\s+(\d+)\s+\"((?:[^\"\\]|\\.)*)\"\s*;)");

  GroundTruth out;
  MessageSpec* current = nullptr;
  std::string pending;  // multi-line CM_ statement
  std::size_t pending_line = 0;
  std::vector<std::pair<std::size_t, std::string>> comments;

  text::for_each_line(content, [&](std::size_t line_no, std::string_view raw) {
    const auto line = text::trim(raw);
    if (!pending.empty()) {
      pending += '\n';
      pending += line;
      if (statement_complete(pending)) {
        comments.emplace_back(pending_line, std::move(pending));
        pending.clear();
      }
      return;
    }
    if (line.empty()) {
      current = nullptr;
      return;
    }
    const std::string s(line);
    std::smatch m;
    if (s.rfind("BO_ ", 0) == 0) {
      if (!std::regex_search(s, m, bo_re)) {
        out.warnings.push_back({line_no, "unparseable BO_ line"});
        current = nullptr;
        return;
      }
      MessageSpec msg;
      msg.id = static_cast<std::uint32_t>(std::stoul(m[1]));
      msg.name = m[2];
      msg.dlc = static_cast<std::uint32_t>(std::stoul(m[3]));
      if (m[4].length() > 0) msg.transmitter = m[4];
      auto [it, inserted] = out.messages.insert_or_assign(msg.id, std::move(msg));
      if (!inserted) out.warnings.push_back({line_no, "duplicate BO_ " + std::to_string(it->first)});
      current = &it->second;
    } else if (s.rfind("SG_ ", 0) == 0) {
      if (!current) {
        out.warnings.push_back({line_no, "SG_ outside a BO_ block"});
        return;
      }
      if (!std::regex_search(s, m, sg_re)) {
        out.warnings.push_back({line_no, "unparseable SG_ line"});
        return;
      }
      SignalSpec sig;
      sig.message_id = current->id;
      sig.name = m[1];
      if (m[2].matched) out.warnings.push_back({line_no, "multiplexing ignored for " + sig.name});
      sig.start_bit = static_cast<std::uint32_t>(std::stoul(m[3]));
      sig.length = static_cast<std::uint32_t>(std::stoul(m[4]));
      sig.byte_order = m[5] == "0" ? ByteOrder::BigEndian : ByteOrder::LittleEndian;
      sig.is_signed = m[6] == "-";
      const auto scale = text::parse_number<double>(m[7].str());
      const auto offset = text::parse_number<double>(m[8].str());
      const auto lo = text::parse_number<double>(m[9].str());
      const auto hi = text::parse_number<double>(m[10].str());
      if (!scale || !offset || !lo || !hi || *scale == 0.0) {
        out.warnings.push_back({line_no, "bad numeric field in SG_ " + sig.name});
        return;
      }
      sig.scale = *scale;
      sig.offset = *offset;
      sig.minimum = *lo;
      sig.maximum = *hi;
      sig.unit = m[11];
      const auto mask = try_mask(sig);
      if (!mask || (current->dlc < 8 && (*mask >> (8 * current->dlc)) != 0)) {
        out.warnings.push_back({line_no, "signal " + sig.name + " lies outside the payload"});
        return;
      }
      current->signals.push_back(std::move(sig));
    } else if (s.rfind("CM_ ", 0) == 0) {
      if (statement_complete(s)) {
        comments.emplace_back(line_no, s);
      } else {
        pending = s;
        pending_line = line_no;
      }
    } else if (s.rfind("BA_", 0) == 0 || s.rfind("VAL_", 0) == 0) {
      current = nullptr;
    }
  });
  if (!pending.empty()) out.warnings.push_back({pending_line, "unterminated CM_ statement"});

  for (const auto& [line_no, stmt] : comments) {
    std::smatch m;
    if (std::regex_search(stmt, m, cm_sg_re)) {
      const auto id = static_cast<std::uint32_t>(std::stoul(m[1]));
      auto msg = out.messages.find(id);
      bool attached = false;
      if (msg != out.messages.end()) {
        for (auto& sig : msg->second.signals) {
          if (sig.name == m[2]) {
            sig.comment = m[3];
            attached = true;
          }
        }
      }
      if (!attached) out.warnings.push_back({line_no, "comment for unknown signal " + m[2].str()});
    } else if (std::regex_search(stmt, m, cm_bo_re)) {
      const auto id = static_cast<std::uint32_t>(std::stoul(m[1]));
      auto msg = out.messages.find(id);
      if (msg != out.messages.end()) {
        msg->second.comment = m[2];
      } else {
        out.warnings.push_back({line_no, "comment for unknown message " + m[1].str()});
      }
    }
  }

  if (out.messages.empty()) throw Error(ErrorCode::NoDefinitions, "DBC text has no BO_ definitions");
  return out;
}

std::string write_dbc(const GroundTruth& truth) {
  std::ostringstream os;
  os << "VERSION \"\"\n\nNS_ :\n\nBS_:\n\nBU_: Vector__XXX\n\n";
  for (const auto& [id, msg] : truth.messages) {
    os << "BO_ " << id << ' ' << msg.name << ": " << msg.dlc << ' ' << msg.transmitter << '\n';
    for (const auto& sig : msg.signals) {
      os << " SG_ " << sig.name << " : " << sig.start_bit << '|' << sig.length << '@'
         << (sig.byte_order == ByteOrder::BigEndian ? '0' : '1') << (sig.is_signed ? '-' : '+')
         << " (" << num(sig.scale) << ',' << num(sig.offset) << ") [" << num(sig.minimum) << '|'
         << num(sig.maximum) << "] \"" << sig.unit << "\" Vector__XXX\n";
    }
    os << '\n';
  }
  for (const auto& [id, msg] : truth.messages) {
    if (!msg.comment.empty()) os << "CM_ BO_ " << id << " \"" << sanitize_comment(msg.comment) << "\";\n";
    for (const auto& sig : msg.signals) {
      if (!sig.comment.empty()) {
        os << "CM_ SG_ " << id << ' ' << sig.name << " \"" << sanitize_comment(sig.comment) << "\";\n";
      }
    }
  }
  return os.str();
}

void apply_annotations(GroundTruth& truth, std::string_view csv) {
  std::map<std::string, std::pair<std::optional<GeneralLabel>, std::optional<std::string>>> by_name;
  text::for_each_line(csv, [&](std::size_t line_no, std::string_view line) {
    if (text::trim(line).empty()) return;
    const auto cells = text::split(line, ',');
    const auto name = std::string(text::unquote(cells[0]));
    if (line_no == 1 && text::lower(name) == "signal_name") return;
    if (cells.size() < 2) {
      truth.warnings.push_back({line_no, "annotation row needs signal_name,category"});
      return;
    }
    const auto category = parse_label_loose(text::unquote(cells[1]));
    if (!category) {
      truth.warnings.push_back({line_no, "unknown category '" + std::string(cells[1]) + "'"});
      return;
    }
    std::optional<std::string> descriptive;
    if (cells.size() > 2 && !text::unquote(cells[2]).empty()) descriptive = std::string(text::unquote(cells[2]));
    by_name[name] = {category, descriptive};
  });
  for (auto& [id, msg] : truth.messages) {
    for (auto& sig : msg.signals) {
      auto it = by_name.find(sig.name);
      if (it == by_name.end()) continue;
      sig.category = it->second.first;
      sig.descriptive = it->second.second;
    }
  }
}

std::string write_annotations(const GroundTruth& truth) {
  std::string out = "signal_name,category,descriptive\n";
  for (const auto& [id, msg] : truth.messages) {
    for (const auto& sig : msg.signals) {
      if (!sig.category) continue;
      out += sig.name + ',' + to_string(*sig.category) + ',' + sig.descriptive.value_or("") + '\n';
    }
  }
  return out;
}

std::vector<std::string> find_overlaps(const GroundTruth& truth) {
  std::vector<std::string> out;
  for (const auto& [id, msg] : truth.messages) {
    for (std::size_t i = 0; i < msg.signals.size(); ++i) {
      for (std::size_t j = i + 1; j < msg.signals.size(); ++j) {
        const auto a = try_mask(msg.signals[i]);
        const auto b = try_mask(msg.signals[j]);
        if (a && b && (*a & *b) != 0) {
          out.push_back(msg.name + ": " + msg.signals[i].name + " overlaps " + msg.signals[j].name);
        }
      }
    }
  }
  return out;
}

InferredMap group_slices(std::span<const SignalSlice> slices,
                         const std::map<std::uint32_t, std::size_t>& widths) {
  InferredMap out;
  for (const auto& [key, width] : widths) out[key] = InferredMessage{key, width, {}};
  for (const auto& s : slices) {
    auto& msg = out[s.key];
    msg.key = s.key;
    if (!widths.contains(s.key)) msg.width = std::max<std::size_t>(msg.width, (s.last_bit + 7) / 8);
    msg.slices.push_back(s);
  }
  return out;
}

std::string emit_dbc(const InferredMap& inferred) {
  GroundTruth dbc;
  for (const auto& [key, msg] : inferred) {
    MessageSpec spec;
    spec.id = key;
    spec.name = "MSG_" + format_id(key).substr(2);
    spec.dlc = static_cast<std::uint32_t>(msg.width);
    std::string unused;
    for (const auto& s : msg.slices) {
      if (s.label == GeneralLabel::Unused) {
        if (!unused.empty()) unused += ',';
        unused += std::to_string(s.first_bit) + '-' + std::to_string(s.last_bit);
        continue;
      }
      SignalSpec sig;
      sig.message_id = key;
      sig.name = "SIG_" + std::to_string(s.first_bit) + '_' + std::to_string(s.last_bit);
      if (s.label) sig.name += std::string("_") + to_string(*s.label);
      sig.start_bit = sequential_to_dbc(s.first_bit);
      sig.length = static_cast<std::uint32_t>(s.length());
      sig.maximum = std::ldexp(1.0, static_cast<int>(sig.length)) - 1.0;
      if (s.descriptive_label) {
        sig.comment = std::string(kDescriptiveTag) + *s.descriptive_label;
        if (s.dtw_distance) sig.comment += ';' + std::string(kDtwTag) + num(*s.dtw_distance);
      }
      spec.signals.push_back(std::move(sig));
    }
    if (!unused.empty()) spec.comment = std::string(kUnusedTag) + unused;
    dbc.messages.emplace(key, std::move(spec));
  }
  return write_dbc(dbc);
}

InferredMap inferred_from_dbc(const GroundTruth& dbc) {
  static const std::regex name_re(R"(^SIG_(\d+)_(\d+)(?:_(\w+))?$)");
  InferredMap out;
  for (const auto& [id, msg] : dbc.messages) {
    InferredMessage im;
    im.key = id;
    im.width = std::min<std::size_t>(msg.dlc, 8);
    BitMask covered = 0;
    for (const auto& sig : msg.signals) {
      const auto mask = try_mask(sig);
      if (!mask) continue;
      std::optional<GeneralLabel> label = sig.category;
      std::smatch m;
      if (std::regex_match(sig.name, m, name_re) && m[3].matched) {
        if (auto l = parse_general_label(m[3].str())) label = l;
      }
      const auto descriptive = tag_value(sig.comment, kDescriptiveTag);
      const auto dtw = tag_value(sig.comment, kDtwTag);
      for (const auto& [first, last] : mask_runs(*mask)) {
        SignalSlice s;
        s.key = id;
        s.first_bit = first;
        s.last_bit = last;
        s.label = label;
        if (!descriptive.empty()) s.descriptive_label = std::string(descriptive);
        if (!dtw.empty()) s.dtw_distance = text::parse_number<double>(dtw);
        im.slices.push_back(std::move(s));
      }
      covered |= *mask;
    }
    const auto unused_text = tag_value(msg.comment, kUnusedTag);
    if (!unused_text.empty()) {
      for (auto part : text::split(unused_text, ',')) {
        const auto dash = part.find('-');
        if (dash == std::string_view::npos) continue;
        const auto first = text::parse_number<std::size_t>(part.substr(0, dash));
        const auto last = text::parse_number<std::size_t>(part.substr(dash + 1));
        if (!first || !last || *first < 1 || *last < *first || *last > kPayloadBits) continue;
        SignalSlice s;
        s.key = id;
        s.first_bit = *first;
        s.last_bit = *last;
        s.label = GeneralLabel::Unused;
        covered |= s.mask();
        im.slices.push_back(std::move(s));
      }
    }
    const BitMask payload = im.width == 0 ? 0 : range_mask(1, 8 * im.width);
    for (const auto& [first, last] : mask_runs(payload & ~covered)) {
      SignalSlice s;
      s.key = id;
      s.first_bit = first;
      s.last_bit = last;
      s.label = GeneralLabel::Unused;
      im.slices.push_back(std::move(s));
    }
    std::sort(im.slices.begin(), im.slices.end(),
              [](const SignalSlice& a, const SignalSlice& b) { return a.first_bit < b.first_bit; });
    out.emplace(id, std::move(im));
  }
  return out;
}

}  // namespace cansig

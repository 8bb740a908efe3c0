#include "cansig/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cansig/dbc.hpp"
#include "cansig/eval.hpp"
#include "cansig/pipeline.hpp"
#include "cansig/slices_json.hpp"
#include "cansig/synth.hpp"
#include "json.hpp"

namespace cansig::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + path.parent_path().string());
  }
  std::ofstream os(path, std::ios::binary);
  os << content;
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
}

std::string num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct TraceArgs {
  std::string path;
  std::string format = "candump";
  CsvColumns columns;
  std::string delimiter = ",";

  void add(CLI::App* app) {
    app->add_option("trace", path, "CAN trace file")->required();
    app->add_option("--format", format, "candump or csv")
        ->check(CLI::IsMember({"candump", "csv"}))
        ->capture_default_str();
    app->add_option("--csv-timestamp", columns.timestamp, "CSV timestamp column")->capture_default_str();
    app->add_option("--csv-id", columns.id, "CSV id column")->capture_default_str();
    app->add_option("--csv-dlc", columns.dlc, "CSV dlc column")->capture_default_str();
    app->add_option("--csv-data", columns.data, "CSV data column")->capture_default_str();
    app->add_option("--csv-delimiter", delimiter, "CSV delimiter")->capture_default_str();
  }

  RawTrace load() {
    if (delimiter.size() != 1) throw Error(ErrorCode::InvalidParams, "CSV delimiter must be one character");
    columns.delimiter = delimiter[0];
    return read_trace_file(path, format == "csv" ? TraceFormat::Csv : TraceFormat::Candump, columns);
  }
};

struct SliceArgs {
  double eps_byte = 0.5;
  double eps_bit = SliceParams{}.bit_level.eps;
  std::size_t min_pts = 2;
  bool standardize_bits = false;
  bool keep_constant_bits = false;
  std::string dump_features;

  void add(CLI::App* app) {
    app->add_option("--eps-byte", eps_byte, "DBSCAN radius, byte level")->capture_default_str();
    app->add_option("--eps-bit", eps_bit, "DBSCAN radius, bit level")->capture_default_str();
    app->add_option("--min-pts", min_pts, "DBSCAN core size, both levels")->capture_default_str();
    app->add_flag("--standardize-bits", standardize_bits, "z-score bit features within each segment");
    app->add_flag("--keep-constant-bits", keep_constant_bits,
                  "let never-flipping bits share a slice with flipping ones");
    app->add_option("--dump-features", dump_features, "also write byte/bit feature tables to this CSV");
  }

  SliceParams params() const {
    SliceParams p;
    p.byte_level = {eps_byte, min_pts};
    p.bit_level = {eps_bit, min_pts};
    p.bits.standardize = standardize_bits;
    p.bits.split_constant = !keep_constant_bits;
    return p;
  }
};

struct LabelArgs {
  std::optional<double> eps0;

  void add(CLI::App* app) { app->add_option("--eps0", eps0, "fixed Switch threshold instead of the derived one"); }
};

struct MatchArgs {
  bool no_normalize = false;
  std::optional<std::size_t> band;
  std::size_t max_series = 5000;
  std::optional<double> max_dtw;
  std::string template_csv;

  void add(CLI::App* app) {
    app->add_flag("--no-normalize", no_normalize, "skip z-normalization before DTW");
    app->add_option("--dtw-band", band, "Sakoe-Chiba half-width");
    app->add_option("--max-series", max_series, "downsample candidates to this many points")
        ->capture_default_str();
    app->add_option("--max-dtw", max_dtw, "leave Dynamic slices unnamed above this distance");
    app->add_option("--template-csv", template_csv, "templates from CSV instead of the trace's OBD-II frames");
  }

  MatchOptions options() const {
    MatchOptions o;
    o.dtw.normalize = !no_normalize;
    o.dtw.band = band;
    o.max_series = max_series;
    o.max_distance = max_dtw;
    return o;
  }

  TemplateSet templates(const RawTrace& trace, std::vector<std::string>& warnings) const {
    if (!template_csv.empty()) return parse_template_csv(read_file(template_csv), &warnings);
    const auto obd = extract_obd_responses(trace);
    warnings.insert(warnings.end(), obd.warnings.begin(), obd.warnings.end());
    return build_templates(obd.samples, &warnings);
  }
};

std::string features_csv(const std::vector<FeatureTable>& tables) {
  std::string out = "can_id,level,position,flip_rate,mean,distinct_ratio\n";
  for (const auto& t : tables) {
    const auto id = format_id(t.key);
    for (std::size_t i = 0; i < t.bytes.size(); ++i) {
      const auto& f = t.bytes[i];
      out += id + ",byte," + std::to_string(i + 1) + ',' + num(f.flip_rate) + ',' + num(f.mean) + ',' +
             num(f.distinct_ratio) + '\n';
    }
    for (std::size_t i = 0; i < t.bits.size(); ++i) {
      const auto& f = t.bits[i];
      out += id + ",bit," + std::to_string(i + 1) + ',' + num(f.flip_rate) + ',' + num(f.mean) + ",\n";
    }
  }
  return out;
}

std::vector<std::string> trace_warnings(const RawTrace& trace) {
  std::vector<std::string> out;
  for (const auto& w : trace.warnings) out.push_back("line " + std::to_string(w.line) + ": " + w.message);
  return out;
}

SliceDocument do_slice(const RawTrace& raw, const TraceMap& traces, const SliceArgs& args, Exec exec) {
  SliceDocument doc;
  doc.params.slice = args.params();
  auto result = slice_all(traces, doc.params.slice, exec);
  if (result.messages.empty()) throw Error(ErrorCode::TooFewFrames, "no CAN id has two usable frames");
  doc.messages = std::move(result.messages);
  doc.slices = std::move(result.slices);
  doc.warnings = trace_warnings(raw);
  doc.warnings.insert(doc.warnings.end(), result.warnings.begin(), result.warnings.end());
  if (!args.dump_features.empty()) write_file(args.dump_features, features_csv(feature_tables(traces, exec)));
  return doc;
}

void do_label(SliceDocument& doc, const LabelArgs& args) {
  doc.stage = Stage::Labeled;
  doc.params.eps0_override = args.eps0;
  const auto summary = label_slices(doc.slices, args.eps0);
  doc.eps0 = summary.eps0;
}

void do_match(SliceDocument& doc, const RawTrace& raw, const TraceMap& traces, const MatchArgs& args, Exec exec) {
  doc.stage = Stage::Matched;
  doc.params.match = args.options();
  const bool any_dynamic = std::any_of(doc.slices.begin(), doc.slices.end(),
                                       [](const SignalSlice& s) { return s.label == GeneralLabel::Dynamic; });
  if (!any_dynamic) return;
  const auto templates = args.templates(raw, doc.warnings);
  const auto warnings = match_all(doc.slices, traces, templates, doc.params.match, exec);
  doc.warnings.insert(doc.warnings.end(), warnings.begin(), warnings.end());
}

InferredMap inferred_map(const SliceDocument& doc) {
  std::map<std::uint32_t, std::size_t> widths;
  for (const auto& [key, info] : doc.messages) widths[key] = info.width;
  return group_slices(doc.slices, widths);
}

InferredMap load_inferred(const std::string& path) {
  const auto content = read_file(path);
  if (fs::path(path).extension() == ".json") return inferred_map(read_slices_json(content));
  return inferred_from_dbc(parse_dbc(content));
}

void print_error(std::ostream& err, const std::string& code, const std::string& message) {
  err << nlohmann::json{{"error", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"CAN signal slicing, labeling and matching"};
  app.name("cansig");
  app.require_subcommand(1);
  int threads = 0;
  bool serial = false;
  app.add_option("--threads", threads, "worker threads (0: all cores)");
  app.add_flag("--serial", serial, "use the serial reference kernels");

  TraceArgs trace_args;
  SliceArgs slice_args;
  LabelArgs label_args;
  MatchArgs match_args;
  std::string out_dir = ".";
  std::string input;

  auto* slice = app.add_subcommand("slice", "trace -> slices.json");
  trace_args.add(slice);
  slice_args.add(slice);
  slice->add_option("-o,--out", out_dir, "output directory")->capture_default_str();

  auto* label = app.add_subcommand("label", "slices.json -> labeled.json");
  label->add_option("slices", input, "slices.json from the slice stage")->required();
  label_args.add(label);
  label->add_option("-o,--out", out_dir, "output directory")->capture_default_str();

  auto* match = app.add_subcommand("match", "labeled.json + trace -> matched.json");
  match->add_option("labeled", input, "labeled.json from the label stage")->required();
  trace_args.add(match);
  match_args.add(match);
  match->add_option("-o,--out", out_dir, "output directory")->capture_default_str();

  auto* infer = app.add_subcommand("infer", "all stages -> slices.json and inferred.dbc");
  trace_args.add(infer);
  slice_args.add(infer);
  label_args.add(infer);
  match_args.add(infer);
  infer->add_option("-o,--out", out_dir, "output directory")->capture_default_str();

  std::string truth_path, annotations, eval_out;
  bool allow_unannotated = false;
  auto* eval = app.add_subcommand("eval", "score inferred slices against a ground-truth DBC");
  eval->add_option("inferred", input, "inferred.dbc or slices.json")->required();
  eval->add_option("truth", truth_path, "ground-truth DBC")->required();
  eval->add_option("--annotations", annotations, "CSV signal_name,category[,descriptive]");
  eval->add_flag("--allow-unannotated", allow_unannotated, "score slicing only when categories are missing");
  eval->add_option("-o,--out", eval_out, "write eval.json and eval_per_id.csv here; table goes to stdout");

  std::string synth_spec;
  std::optional<std::uint64_t> seed;
  std::size_t synth_ids = 20, synth_frames = 10000;
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("spec", synth_spec, "JSON corpus config (omit for the built-in 20-id corpus)");
  synth->add_option("--seed", seed, "override the config's seed");
  synth->add_option("--ids", synth_ids, "ids in the built-in corpus")->capture_default_str();
  synth->add_option("--frames", synth_frames, "frames per id in the built-in corpus")->capture_default_str();
  synth->add_option("-o,--out", out_dir, "output directory")->capture_default_str();

  auto* features = app.add_subcommand("features", "byte and bit feature tables as CSV");
  trace_args.add(features);
  features->add_option("-o,--out", out_dir, "output directory")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "Usage", e.what());
    return kExitUsage;
  }

  set_threads(threads);
  const Exec exec = serial ? Exec::Serial : Exec::Parallel;
  const fs::path dir(out_dir);

  try {
    if (slice->parsed()) {
      const auto raw = trace_args.load();
      const auto doc = do_slice(raw, group_by_id(raw), slice_args, exec);
      write_file(dir / "slices.json", write_slices_json(doc));
    } else if (label->parsed()) {
      auto doc = read_slices_json(read_file(input));
      do_label(doc, label_args);
      write_file(dir / "labeled.json", write_slices_json(doc));
    } else if (match->parsed()) {
      auto doc = read_slices_json(read_file(input));
      if (doc.stage != Stage::Labeled) throw Error(ErrorCode::Format, "match expects a labeled document");
      const auto raw = trace_args.load();
      do_match(doc, raw, group_by_id(raw), match_args, exec);
      write_file(dir / "matched.json", write_slices_json(doc));
    } else if (infer->parsed()) {
      const auto raw = trace_args.load();
      const auto traces = group_by_id(raw);
      auto doc = do_slice(raw, traces, slice_args, exec);
      do_label(doc, label_args);
      do_match(doc, raw, traces, match_args, exec);
      write_file(dir / "slices.json", write_slices_json(doc));
      write_file(dir / "inferred.dbc", emit_dbc(inferred_map(doc)));
    } else if (eval->parsed()) {
      const auto inferred = load_inferred(input);
      auto truth = parse_dbc(read_file(truth_path));
      if (!annotations.empty()) apply_annotations(truth, read_file(annotations));
      const auto report = evaluate(inferred, truth, !allow_unannotated);
      if (eval_out.empty()) {
        out << report_to_json(report);
      } else {
        write_file(fs::path(eval_out) / "eval.json", report_to_json(report));
        write_file(fs::path(eval_out) / "eval_per_id.csv", report_per_id_csv(report));
        out << report_table(report);
      }
    } else if (synth->parsed()) {
      SynthSpec spec = synth_spec.empty() ? default_spec(seed.value_or(1), synth_ids, synth_frames)
                                          : parse_synth_spec(read_file(synth_spec));
      if (seed) spec.seed = *seed;
      write_corpus(generate_trace(spec), dir);
      write_file(dir / "spec.json", write_synth_spec(spec));
    } else if (features->parsed()) {
      const auto raw = trace_args.load();
      write_file(dir / "features.csv", features_csv(feature_tables(group_by_id(raw), exec)));
    }
  } catch (const Error& e) {
    print_error(err, to_string(e.code()), e.what());
    return kExitData;
  } catch (const std::exception& e) {
    print_error(err, "Internal", e.what());
    return kExitData;
  }
  return kExitOk;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace cansig::cli

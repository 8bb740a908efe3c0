// Serial reference vs OpenMP kernels on a synthetic corpus.

#include <chrono>
#include <cstdio>
#include <functional>

#include "CLI11.hpp"
#include "cansig/labeling.hpp"
#include "cansig/pipeline.hpp"
#include "cansig/synth.hpp"

using namespace cansig;

namespace {

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel benchmark"};
  std::size_t ids = 20;
  std::size_t frames = 10000;
  int reps = 3;
  int threads = 0;
  std::uint64_t seed = 1;
  app.add_option("--ids", ids)->capture_default_str();
  app.add_option("--frames", frames, "frames per id")->capture_default_str();
  app.add_option("--reps", reps, "best of this many runs")->capture_default_str();
  app.add_option("--threads", threads, "0: runtime default")->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  set_threads(threads);
  const auto corpus = generate_trace(default_spec(seed, ids, frames));
  const auto traces = group_by_id(corpus.trace);
  const SliceParams params;
  auto labeled = slice_all(traces, params, Exec::Serial).slices;
  label_slices(labeled);

  std::printf("%zu ids x %zu frames, %d thread(s), best of %d\n", ids, frames, max_threads(), reps);
  std::printf("%-16s %12s %12s %9s\n", "kernel", "serial s", "parallel s", "speedup");

  const auto row = [&](const char* name, const std::function<void(Exec)>& fn) {
    const double s = best_of(reps, [&] { fn(Exec::Serial); });
    const double p = best_of(reps, [&] { fn(Exec::Parallel); });
    std::printf("%-16s %12.4f %12.4f %8.2fx\n", name, s, p, s / p);
  };

  row("feature_tables", [&](Exec e) { feature_tables(traces, e); });
  row("slice_all", [&](Exec e) { slice_all(traces, params, e); });
  row("match_all", [&](Exec e) {
    auto copy = labeled;
    match_all(copy, traces, corpus.templates, MatchOptions{}, e);
  });

  // Both paths must agree, or the timing is meaningless.
  auto a = labeled;
  auto b = labeled;
  match_all(a, traces, corpus.templates, MatchOptions{}, Exec::Serial);
  match_all(b, traces, corpus.templates, MatchOptions{}, Exec::Parallel);
  if (!(a == b) || !(slice_all(traces, params, Exec::Serial).slices == slice_all(traces, params, Exec::Parallel).slices)) {
    std::printf("serial and parallel results differ\n");
    return 1;
  }
  return 0;
}

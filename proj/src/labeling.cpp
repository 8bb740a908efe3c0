#include "cansig/labeling.hpp"

#include <algorithm>
#include <cmath>

#include "cansig/error.hpp"

namespace cansig {

const char* to_string(GeneralLabel label) noexcept {
  switch (label) {
    case GeneralLabel::Unused: return "Unused";
    case GeneralLabel::Switch: return "Switch";
    case GeneralLabel::Dynamic: return "Dynamic";
    case GeneralLabel::Verification: return "Verification";
  }
  return "Unused";
}

std::optional<GeneralLabel> parse_general_label(std::string_view text) {
  for (auto l : {GeneralLabel::Unused, GeneralLabel::Switch, GeneralLabel::Dynamic,
                 GeneralLabel::Verification}) {
    if (text == to_string(l)) return l;
  }
  return std::nullopt;
}

double derive_threshold(std::span<const double> thetas) {
  std::vector<double> positive;
  for (double t : thetas) {
    if (t > 0.0) positive.push_back(t);
  }
  if (positive.empty()) throw Error(ErrorCode::NoActiveSignals, "no slice has a positive theta");
  std::sort(positive.begin(), positive.end());
  if (positive.front() == positive.back()) return positive.front();

  // Two-group split of log(theta) with the largest between-group variance,
  // tried at every gap between distinct values.
  const std::size_t n = positive.size();
  std::vector<double> logs(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    logs[i] = std::log(positive[i]);
    total += logs[i];
  }
  std::size_t best = 0;
  double best_score = -1.0;
  double left = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    left += logs[i];
    if (positive[i] == positive[i + 1]) continue;
    const double n1 = static_cast<double>(i + 1);
    const double n2 = static_cast<double>(n - i - 1);
    const double diff = left / n1 - (total - left) / n2;
    const double score = n1 * n2 * diff * diff;
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return 0.5 * (positive[best] + positive[best + 1]);
}

GeneralLabel assign_general_label(double theta, const BlockFeatures& features, double eps0) {
  if (theta == 0.0 && features.flip_rate == 0.0) return GeneralLabel::Unused;
  if (theta <= eps0) return GeneralLabel::Switch;
  return features.flip_rate >= kVerificationFlipFloor ? GeneralLabel::Verification
                                                      : GeneralLabel::Dynamic;
}

LabelSummary label_slices(std::span<SignalSlice> slices, std::optional<double> eps0_override) {
  LabelSummary summary;
  std::vector<double> thetas;
  thetas.reserve(slices.size());
  for (auto& s : slices) {
    s.theta = compute_theta(s.features);
    thetas.push_back(s.theta);
  }
  if (eps0_override) {
    summary.eps0 = eps0_override;
    summary.eps0_overridden = true;
  } else if (std::any_of(thetas.begin(), thetas.end(), [](double t) { return t > 0.0; })) {
    summary.eps0 = derive_threshold(thetas);
  }
  for (auto& s : slices) {
    // Without an active slice every theta is zero and everything is Unused.
    s.label = assign_general_label(s.theta, s.features, summary.eps0.value_or(0.0));
  }
  return summary;
}

}  // namespace cansig

#include "vpgnn/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace vpgnn {

double f1_score(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("f1_score: length mismatch");
  }
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == 1 && truth[i] == 1) {
      ++tp;
    } else if (pred[i] == 1 && truth[i] == 0) {
      ++fp;
    } else if (pred[i] == 0 && truth[i] == 1) {
      ++fn;
    }
  }
  const double denom = static_cast<double>(2 * tp + fp + fn);
  if (denom == 0.0) {
    return 0.0;
  }
  return 2.0 * static_cast<double>(tp) / denom;
}

std::pair<double, double> mean_ci(const std::vector<double>& scores) {
  if (scores.empty()) {
    throw std::invalid_argument("mean_ci: empty score list");
  }
  const double n = static_cast<double>(scores.size());
  double mean = 0.0;
  for (double s : scores) {
    mean += s;
  }
  mean /= n;
  if (scores.size() == 1) {
    return {mean, 0.0};
  }
  double ss = 0.0;
  for (double s : scores) {
    ss += (s - mean) * (s - mean);
  }
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, 1.96 * sd / std::sqrt(n)};
}

double bpwc(double prec, std::size_t tp, double prec_base, std::size_t tp_base) {
  if (prec < 0.0 || prec > 1.0 || prec_base < 0.0 || prec_base > 1.0) {
    throw std::invalid_argument("bpwc: precisions must lie in [0, 1]");
  }
  const double base = prec_base * static_cast<double>(tp_base);
  if (base <= 0.0) {
    throw std::invalid_argument("bpwc: base precision x true positives is zero");
  }
  return 100.0 * (prec * static_cast<double>(tp)) / base;
}

}  // namespace vpgnn

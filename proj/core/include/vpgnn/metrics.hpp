#pragma once

#include <utility>
#include <vector>

namespace vpgnn {

// F1 on the positive (abusive) class; 0 when precision + recall is 0.
double f1_score(const std::vector<int>& pred, const std::vector<int>& truth);

// Mean and normal-approximation 95% CI halfwidth (1.96 * sd / sqrt(n), sample
// standard deviation). A single score has halfwidth 0 by convention.
std::pair<double, double> mean_ci(const std::vector<double>& scores);

// BCP-normalized precision-weighted coverage, in percent:
// 100 * (prec * tp) / (prec_base * tp_base).
double bpwc(double prec, std::size_t tp, double prec_base, std::size_t tp_base);

}  // namespace vpgnn

#pragma once

#include <cstddef>
#include <vector>

#include "vpgnn/rng.hpp"

namespace vpgnn {

// Row-major dense real matrix. All math in this project runs in 64-bit
// floats so gradient checks reproduce exactly.
struct Dense {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Dense() = default;
  Dense(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) {
    return values[i * cols + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return values[i * cols + j];
  }

  double* row_ptr(std::size_t i) { return values.data() + i * cols; }
  const double* row_ptr(std::size_t i) const { return values.data() + i * cols; }

  std::size_t size() const noexcept { return values.size(); }
  bool same_shape(const Dense& o) const noexcept {
    return rows == o.rows && cols == o.cols;
  }
  bool all_finite() const noexcept;

  bool operator==(const Dense& o) const = default;
};

// C = A * B. Throws std::invalid_argument on inner-dimension mismatch.
Dense matmul(const Dense& a, const Dense& b);

// C = A^T * B.
Dense matmul_at_b(const Dense& a, const Dense& b);

// C = A * B^T.
Dense matmul_a_bt(const Dense& a, const Dense& b);

// a += scale * b. Shapes must match.
void add_scaled(Dense& a, const Dense& b, double scale = 1.0);

void scale_inplace(Dense& a, double scale);

// Uniform init in +-sqrt(6 / (fan_in + fan_out)).
Dense glorot_uniform(std::size_t rows, std::size_t cols, RngStream& rng);

double sigmoid(double x);

}  // namespace vpgnn

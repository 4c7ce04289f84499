#include "vpgnn/dense.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vpgnn {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

}  // namespace

bool Dense::all_finite() const noexcept {
  for (double v : values) {
    if (!std::isfinite(v)) {
      return false;
    }
  }
  return true;
}

Dense matmul(const Dense& a, const Dense& b) {
  require(a.cols == b.rows, "matmul: inner dimensions differ (" +
                                std::to_string(a.cols) + " vs " +
                                std::to_string(b.rows) + ")");
  Dense c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a.row_ptr(i);
    double* ci = c.row_ptr(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = ai[k];
      if (aik == 0.0) {
        continue;
      }
      const double* bk = b.row_ptr(k);
      for (std::size_t j = 0; j < b.cols; ++j) {
        ci[j] += aik * bk[j];
      }
    }
  }
  return c;
}

Dense matmul_at_b(const Dense& a, const Dense& b) {
  require(a.rows == b.rows, "matmul_at_b: row counts differ");
  Dense c(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* ak = a.row_ptr(k);
    const double* bk = b.row_ptr(k);
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double aki = ak[i];
      if (aki == 0.0) {
        continue;
      }
      double* ci = c.row_ptr(i);
      for (std::size_t j = 0; j < b.cols; ++j) {
        ci[j] += aki * bk[j];
      }
    }
  }
  return c;
}

Dense matmul_a_bt(const Dense& a, const Dense& b) {
  require(a.cols == b.cols, "matmul_a_bt: column counts differ");
  Dense c(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a.row_ptr(i);
    double* ci = c.row_ptr(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* bj = b.row_ptr(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) {
        acc += ai[k] * bj[k];
      }
      ci[j] = acc;
    }
  }
  return c;
}

void add_scaled(Dense& a, const Dense& b, double scale) {
  require(a.same_shape(b), "add_scaled: shape mismatch");
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    a.values[i] += scale * b.values[i];
  }
}

void scale_inplace(Dense& a, double scale) {
  for (double& v : a.values) {
    v *= scale;
  }
}

Dense glorot_uniform(std::size_t rows, std::size_t cols, RngStream& rng) {
  Dense m(rows, cols);
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& v : m.values) {
    v = (2.0 * rng.next_real() - 1.0) * bound;
  }
  return m;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace vpgnn

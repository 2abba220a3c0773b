// Scalar reference kernels. These define the semantics the vector variants
// are tested against.

#include <cmath>
#include <limits>

#include "qmu/simd/kernels.hpp"

namespace qmu::simd {
namespace {

struct InnerParts {
  double re;
  double im;
};

// <z_j, w> split into real and imaginary parts.
inline InnerParts inner_with(const AtomBlock& b, std::size_t j, const cplx* w) {
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < b.dim; ++k) {
    const double zr = b.re[k][j], zi = b.im[k][j];
    const double wr = w[k].real(), wi = w[k].imag();
    re += zr * wr + zi * wi;
    im += zi * wr - zr * wi;
  }
  return {re, im};
}

inline double dist_sq(const AtomBlock& b, std::size_t j, const cplx* w) {
  const InnerParts p = inner_with(b, j, w);
  const double ur = 1.0 - p.re;
  return ur * ur + p.im * p.im;
}

double kernel_power_sum(const AtomBlock& b, const cplx* w, double exponent) {
  const double half = -0.5 * exponent;
  double s = 0.0;
  for (std::size_t j = 0; j < b.count; ++j) s += b.weight[j] * std::exp(half * std::log(dist_sq(b, j, w)));
  return s;
}

void distances_sq(const AtomBlock& b, const cplx* w, double* out) {
  for (std::size_t j = 0; j < b.count; ++j) out[j] = dist_sq(b, j, w);
}

double masked_sum(const AtomBlock& b, const cplx* w, const double* values, const double* thresholds_sq) {
  double s = 0.0;
  for (std::size_t j = 0; j < b.count; ++j)
    if (dist_sq(b, j, w) < thresholds_sq[j]) s += values[j];
  return s;
}

void gram_row(const AtomBlock& b, std::size_t i, int power, cplx* out) {
  std::array<cplx, kMaxDim> zi{};
  for (std::size_t k = 0; k < b.dim; ++k) zi[k] = cplx(b.re[k][i], b.im[k][i]);
  const double si = b.sqrt_weight[i];
  for (std::size_t j = 0; j < b.count; ++j) {
    // <z_i, z_j> = conj(<z_j, z_i>)
    const InnerParts p = inner_with(b, j, zi.data());
    const double ur = 1.0 - p.re, ui = p.im;
    const double d = ur * ur + ui * ui;
    const double vr = ur / d, vi = -ui / d;
    double rr = vr, ri = vi;
    for (int e = 1; e < power; ++e) {
      const double tr = rr * vr - ri * vi;
      ri = rr * vi + ri * vr;
      rr = tr;
    }
    const double s = si * b.sqrt_weight[j];
    out[j] = cplx(s * rr, s * ri);
  }
}

std::size_t closeness_update(const AtomBlock& b, const cplx* a, double a_norm_sq, double* closeness) {
  const double fa = 1.0 - a_norm_sq;
  std::size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < b.count; ++j) {
    const double c = fa * b.one_minus_norm_sq[j] / dist_sq(b, j, a);
    if (c > closeness[j]) closeness[j] = c;
    if (closeness[j] < best_val) {
      best_val = closeness[j];
      best = j;
    }
  }
  return best;
}

}  // namespace

namespace detail {
const KernelTable& scalar_table() {
  static const KernelTable table{Isa::scalar, &kernel_power_sum, &distances_sq, &masked_sum, &gram_row, &closeness_update};
  return table;
}
}  // namespace detail

}  // namespace qmu::simd

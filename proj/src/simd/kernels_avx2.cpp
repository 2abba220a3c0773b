// AVX2 + FMA kernels. Compiled with -mavx2 -mfma; only reached through the
// dispatch table after a CPUID check.

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "qmu/simd/kernels.hpp"

namespace qmu::simd {
namespace {

// log(x) for finite x > 0 (normal range). Argument reduction to
// m in [sqrt(2)/2, sqrt(2)) followed by the fdlibm log1p kernel on
// s = f/(2+f); error within a couple of ulp.
inline __m256d log_pd(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i one_exp = _mm256_set1_epi64x(0x3FF0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_exp));
  // Unbiased exponent as double via the 2^52 magic constant.
  const __m256i exp_bits = _mm256_srli_epi64(bits, 52);
  const __m256d magic = _mm256_set1_pd(4503599627370496.0);  // 2^52
  __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(exp_bits, _mm256_castpd_si256(magic))), magic);
  e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));

  const __m256d sqrt2 = _mm256_set1_pd(1.41421356237309504880);
  const __m256d big = _mm256_cmp_pd(m, sqrt2, _CMP_GE_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

  const __m256d f = _mm256_sub_pd(m, _mm256_set1_pd(1.0));
  const __m256d s = _mm256_div_pd(f, _mm256_add_pd(_mm256_set1_pd(2.0), f));
  const __m256d z = _mm256_mul_pd(s, s);
  const __m256d w = _mm256_mul_pd(z, z);
  // fdlibm e_log.c coefficients
  __m256d t1 = _mm256_fmadd_pd(w, _mm256_set1_pd(1.479819860511658591e-01), _mm256_set1_pd(1.818357216161805012e-01));
  t1 = _mm256_fmadd_pd(w, t1, _mm256_set1_pd(2.857142874366239149e-01));
  t1 = _mm256_fmadd_pd(w, t1, _mm256_set1_pd(6.666666666666735130e-01));
  t1 = _mm256_mul_pd(z, t1);
  __m256d t2 = _mm256_fmadd_pd(w, _mm256_set1_pd(1.531383769920937332e-01), _mm256_set1_pd(2.222219843214978396e-01));
  t2 = _mm256_fmadd_pd(w, t2, _mm256_set1_pd(3.999999999940941908e-01));
  t2 = _mm256_mul_pd(w, t2);
  const __m256d r = _mm256_add_pd(t1, t2);
  const __m256d hfsq = _mm256_mul_pd(_mm256_set1_pd(0.5), _mm256_mul_pd(f, f));

  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  // e*ln2_hi + (f - (hfsq - (s*(hfsq+R) + e*ln2_lo)))
  __m256d inner = _mm256_fmadd_pd(s, _mm256_add_pd(hfsq, r), _mm256_mul_pd(e, ln2_lo));
  inner = _mm256_sub_pd(f, _mm256_sub_pd(hfsq, inner));
  return _mm256_fmadd_pd(e, ln2_hi, inner);
}

// exp(x), x clamped to [-708, 709]. Reduction x = k ln2 + r, |r| <= ln2/2,
// degree-13 Taylor polynomial for exp(r), then scaling by 2^k through the
// exponent field.
inline __m256d exp_pd(__m256d x) {
  x = _mm256_max_pd(_mm256_min_pd(x, _mm256_set1_pd(709.0)), _mm256_set1_pd(-708.0));
  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.44269504088896340736)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, _mm256_set1_pd(6.93147180369123816490e-01), x);
  r = _mm256_fnmadd_pd(k, _mm256_set1_pd(1.90821492927058770002e-10), r);

  static constexpr double kInvFact[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
      1.0 / 40320.0,      1.0 / 5040.0,      1.0 / 720.0,      1.0 / 120.0,     1.0 / 24.0,
      1.0 / 6.0,          0.5,               1.0,              1.0};
  __m256d p = _mm256_set1_pd(kInvFact[0]);
  for (int i = 1; i < 14; ++i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[i]));

  const __m256d biased = _mm256_add_pd(k, _mm256_set1_pd(1023.0 + 4503599627370496.0));
  const __m256i pow2 = _mm256_slli_epi64(_mm256_castpd_si256(biased), 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(pow2));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// |1 - <z_j, w>|^2 for lanes j .. j+3.
inline __m256d dist_sq4(const AtomBlock& b, std::size_t j, const cplx* w) {
  __m256d re = _mm256_setzero_pd(), im = _mm256_setzero_pd();
  for (std::size_t k = 0; k < b.dim; ++k) {
    const __m256d zr = _mm256_loadu_pd(b.re[k].data() + j);
    const __m256d zi = _mm256_loadu_pd(b.im[k].data() + j);
    const __m256d wr = _mm256_set1_pd(w[k].real());
    const __m256d wi = _mm256_set1_pd(w[k].imag());
    re = _mm256_fmadd_pd(zr, wr, re);
    re = _mm256_fmadd_pd(zi, wi, re);
    im = _mm256_fmadd_pd(zi, wr, im);
    im = _mm256_fnmadd_pd(zr, wi, im);
  }
  const __m256d ur = _mm256_sub_pd(_mm256_set1_pd(1.0), re);
  return _mm256_fmadd_pd(ur, ur, _mm256_mul_pd(im, im));
}

inline double dist_sq1(const AtomBlock& b, std::size_t j, const cplx* w) {
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < b.dim; ++k) {
    const double zr = b.re[k][j], zi = b.im[k][j];
    re += zr * w[k].real() + zi * w[k].imag();
    im += zi * w[k].real() - zr * w[k].imag();
  }
  const double ur = 1.0 - re;
  return ur * ur + im * im;
}

double kernel_power_sum(const AtomBlock& b, const cplx* w, double exponent) {
  const double half = -0.5 * exponent;
  const __m256d vhalf = _mm256_set1_pd(half);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= b.count; j += 4) {
    const __m256d d = dist_sq4(b, j, w);
    const __m256d term = exp_pd(_mm256_mul_pd(vhalf, log_pd(d)));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(b.weight.data() + j), term, acc);
  }
  double s = hsum(acc);
  for (; j < b.count; ++j) s += b.weight[j] * std::exp(half * std::log(dist_sq1(b, j, w)));
  return s;
}

void distances_sq(const AtomBlock& b, const cplx* w, double* out) {
  std::size_t j = 0;
  for (; j + 4 <= b.count; j += 4) _mm256_storeu_pd(out + j, dist_sq4(b, j, w));
  for (; j < b.count; ++j) out[j] = dist_sq1(b, j, w);
}

double masked_sum(const AtomBlock& b, const cplx* w, const double* values, const double* thresholds_sq) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= b.count; j += 4) {
    const __m256d d = dist_sq4(b, j, w);
    const __m256d mask = _mm256_cmp_pd(d, _mm256_loadu_pd(thresholds_sq + j), _CMP_LT_OQ);
    acc = _mm256_add_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(values + j)));
  }
  double s = hsum(acc);
  for (; j < b.count; ++j)
    if (dist_sq1(b, j, w) < thresholds_sq[j]) s += values[j];
  return s;
}

void gram_row(const AtomBlock& b, std::size_t i, int power, cplx* out) {
  std::array<cplx, kMaxDim> zi{};
  for (std::size_t k = 0; k < b.dim; ++k) zi[k] = cplx(b.re[k][i], b.im[k][i]);
  const double si = b.sqrt_weight[i];
  const __m256d vsi = _mm256_set1_pd(si);
  std::size_t j = 0;
  alignas(32) double rr_buf[4], ri_buf[4];
  for (; j + 4 <= b.count; j += 4) {
    __m256d re = _mm256_setzero_pd(), im = _mm256_setzero_pd();
    for (std::size_t k = 0; k < b.dim; ++k) {
      const __m256d zr = _mm256_loadu_pd(b.re[k].data() + j);
      const __m256d zim = _mm256_loadu_pd(b.im[k].data() + j);
      const __m256d wr = _mm256_set1_pd(zi[k].real());
      const __m256d wi = _mm256_set1_pd(zi[k].imag());
      re = _mm256_fmadd_pd(zr, wr, re);
      re = _mm256_fmadd_pd(zim, wi, re);
      im = _mm256_fmadd_pd(zim, wr, im);
      im = _mm256_fnmadd_pd(zr, wi, im);
    }
    const __m256d ur = _mm256_sub_pd(_mm256_set1_pd(1.0), re);
    const __m256d d = _mm256_fmadd_pd(ur, ur, _mm256_mul_pd(im, im));
    const __m256d vr = _mm256_div_pd(ur, d);
    const __m256d vi = _mm256_div_pd(_mm256_sub_pd(_mm256_setzero_pd(), im), d);
    __m256d rr = vr, ri = vi;
    for (int e = 1; e < power; ++e) {
      const __m256d tr = _mm256_fmsub_pd(rr, vr, _mm256_mul_pd(ri, vi));
      ri = _mm256_fmadd_pd(rr, vi, _mm256_mul_pd(ri, vr));
      rr = tr;
    }
    const __m256d s = _mm256_mul_pd(vsi, _mm256_loadu_pd(b.sqrt_weight.data() + j));
    _mm256_store_pd(rr_buf, _mm256_mul_pd(s, rr));
    _mm256_store_pd(ri_buf, _mm256_mul_pd(s, ri));
    for (int l = 0; l < 4; ++l) out[j + l] = cplx(rr_buf[l], ri_buf[l]);
  }
  for (; j < b.count; ++j) {
    double re = 0.0, im = 0.0;
    for (std::size_t k = 0; k < b.dim; ++k) {
      const double zr = b.re[k][j], zim = b.im[k][j];
      re += zr * zi[k].real() + zim * zi[k].imag();
      im += zim * zi[k].real() - zr * zi[k].imag();
    }
    const double ur = 1.0 - re, ui = im;
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
  const __m256d vfa = _mm256_set1_pd(fa);
  std::size_t j = 0;
  for (; j + 4 <= b.count; j += 4) {
    const __m256d d = dist_sq4(b, j, a);
    const __m256d c = _mm256_div_pd(_mm256_mul_pd(vfa, _mm256_loadu_pd(b.one_minus_norm_sq.data() + j)), d);
    _mm256_storeu_pd(closeness + j, _mm256_max_pd(c, _mm256_loadu_pd(closeness + j)));
  }
  for (; j < b.count; ++j) {
    const double c = fa * b.one_minus_norm_sq[j] / dist_sq1(b, j, a);
    if (c > closeness[j]) closeness[j] = c;
  }
  // First index of the minimum, matching the scalar tie rule.
  std::size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < b.count; ++i) {
    if (closeness[i] < best_val) {
      best_val = closeness[i];
      best = i;
    }
  }
  return best;
}

}  // namespace

namespace detail {
const KernelTable& avx2_table() {
  static const KernelTable table{Isa::avx2, &kernel_power_sum, &distances_sq, &masked_sum, &gram_row, &closeness_update};
  return table;
}
}  // namespace detail

}  // namespace qmu::simd

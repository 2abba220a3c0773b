#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "qmu/errors.hpp"
#include "qmu/simd/kernels.hpp"

namespace qmu::simd {

namespace {

template <class Pts>
AtomBlock build_impl(const Pts& points, std::span<const double> weights) {
  if (points.size() != weights.size()) throw InputError("AtomBlock: points and weights differ in length");
  AtomBlock b;
  b.count = points.size();
  b.dim = b.count ? static_cast<const Coords&>(points[0]).dim() : 0;
  for (std::size_t k = 0; k < b.dim; ++k) {
    b.re[k].resize(b.count);
    b.im[k].resize(b.count);
  }
  b.weight.assign(weights.begin(), weights.end());
  b.sqrt_weight.resize(b.count);
  b.one_minus_norm_sq.resize(b.count);
  for (std::size_t j = 0; j < b.count; ++j) {
    const Coords& c = points[j];
    if (c.dim() != b.dim) throw InputError("AtomBlock: mixed dimensions");
    for (std::size_t k = 0; k < b.dim; ++k) {
      b.re[k][j] = c[k].real();
      b.im[k][j] = c[k].imag();
    }
    b.sqrt_weight[j] = std::sqrt(weights[j]);
    b.one_minus_norm_sq[j] = 1.0 - c.norm_sq();
  }
  return b;
}

const KernelTable& select() {
  if (const char* env = std::getenv("QMU_SIMD"); env && std::string(env) == "scalar") return detail::scalar_table();
  if (isa_available(Isa::avx2)) return kernels_for(Isa::avx2);
  return detail::scalar_table();
}

}  // namespace

AtomBlock AtomBlock::build(std::span<const Coords> points, std::span<const double> weights) {
  return build_impl(points, weights);
}

AtomBlock AtomBlock::build(std::span<const Point> points, std::span<const double> weights) {
  return build_impl(points, weights);
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_available(isa)) throw std::runtime_error("instruction set " + std::string(isa_name(isa)) + " not available");
#if defined(__x86_64__)
  if (isa == Isa::avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

const KernelTable& kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace qmu::simd

#pragma once
// Data-parallel inner loops over point clouds.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The active table is picked once at startup from CPUID;
// setting QMU_SIMD=scalar in the environment forces the reference path.
// Results of the two paths agree to rounding (see tests/test_simd.cpp) but
// are not bitwise identical because reductions are ordered differently.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "qmu/geometry.hpp"

namespace qmu::simd {

/// Structure-of-arrays copy of a point cloud with one weight per point.
struct AtomBlock {
  std::size_t dim = 0;
  std::size_t count = 0;
  std::array<std::vector<double>, kMaxDim> re;
  std::array<std::vector<double>, kMaxDim> im;
  std::vector<double> weight;
  std::vector<double> sqrt_weight;
  std::vector<double> one_minus_norm_sq;

  static AtomBlock build(std::span<const Coords> points, std::span<const double> weights);
  static AtomBlock build(std::span<const Point> points, std::span<const double> weights);
};

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  /// sum_j weight_j |1 - <z_j, w>|^{-exponent}
  double (*kernel_power_sum)(const AtomBlock& b, const cplx* w, double exponent);
  /// out_j = |1 - <z_j, w>|^2
  void (*distances_sq)(const AtomBlock& b, const cplx* w, double* out);
  /// sum_j values_j over j with |1 - <z_j, w>|^2 < thresholds_sq_j
  double (*masked_sum)(const AtomBlock& b, const cplx* w, const double* values, const double* thresholds_sq);
  /// out_j = sqrt(c_i c_j) (1 - <z_i, z_j>)^{-power}, power >= 1
  void (*gram_row)(const AtomBlock& b, std::size_t i, int power, cplx* out);
  /// closeness_j <- max(closeness_j, (1-|a|^2)(1-|z_j|^2)/|1-<z_j,a>|^2);
  /// returns the index of the smallest updated closeness (farthest point).
  std::size_t (*closeness_update)(const AtomBlock& b, const cplx* a, double a_norm_sq, double* closeness);
};

bool isa_available(Isa isa);

/// Table for a specific instruction set; throws if it is unavailable.
const KernelTable& kernels_for(Isa isa);

/// Table selected at startup.
const KernelTable& kernels();

namespace detail {
const KernelTable& scalar_table();
#if defined(__x86_64__)
const KernelTable& avx2_table();
#endif
}  // namespace detail

}  // namespace qmu::simd

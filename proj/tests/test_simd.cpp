#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qmu/simd/kernels.hpp"

using namespace qmu;
using namespace qmu::simd;

namespace {

struct Cloud {
  std::vector<Point> points;
  std::vector<double> weights;
};

Cloud random_cloud(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Cloud c;
  for (std::size_t j = 0; j < m; ++j) {
    Coords z(n);
    for (std::size_t k = 0; k < n; ++k) z[k] = cplx(g(rng), g(rng));
    // radii spread toward the sphere
    const double r = 1.0 - std::pow(2.0, -12.0 * u(rng));
    c.points.emplace_back((r / std::sqrt(z.norm_sq())) * z);
    c.weights.push_back(0.1 + u(rng));
  }
  return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("vector kernels agree with the scalar reference") {
    if (!isa_available(Isa::avx2)) {
      MESSAGE("AVX2 not available; only the scalar path is exercised");
      return;
    }
    const KernelTable& ref = kernels_for(Isa::scalar);
    const KernelTable& vec = kernels_for(Isa::avx2);
    for (std::size_t n : {1u, 2u}) {
      for (std::size_t m : {1u, 3u, 4u, 7u, 64u, 1001u}) {
        const Cloud cloud = random_cloud(n, m, 17 * m + n);
        const AtomBlock b = AtomBlock::build(cloud.points, cloud.weights);
        const Cloud probes = random_cloud(n, 8, 5 + m);
        for (const Point& w : probes.points) {
          for (double e : {1.0, 2.0, 2.5, 3.0 + 1.0 / 3.0, 6.0}) {
            CHECK(rel(ref.kernel_power_sum(b, w.coords().data(), e), vec.kernel_power_sum(b, w.coords().data(), e)) <
                  1e-13);
          }
          std::vector<double> d1(m), d2(m);
          ref.distances_sq(b, w.coords().data(), d1.data());
          vec.distances_sq(b, w.coords().data(), d2.data());
          for (std::size_t j = 0; j < m; ++j) CHECK(rel(d1[j], d2[j]) < 1e-13);

          std::vector<double> thr(m);
          for (std::size_t j = 0; j < m; ++j) thr[j] = d1[j] * (j % 2 ? 1.5 : 0.5);
          CHECK(rel(ref.masked_sum(b, w.coords().data(), cloud.weights.data(), thr.data()),
                    vec.masked_sum(b, w.coords().data(), cloud.weights.data(), thr.data())) < 1e-13);

          std::vector<double> c1(m, 0.0), c2(m, 0.0);
          const std::size_t i1 = ref.closeness_update(b, w.coords().data(), w.norm_sq(), c1.data());
          const std::size_t i2 = vec.closeness_update(b, w.coords().data(), w.norm_sq(), c2.data());
          CHECK(i1 == i2);
          for (std::size_t j = 0; j < m; ++j) CHECK(rel(c1[j], c2[j]) < 1e-13);
        }
        for (int power : {1, 2, 3}) {
          std::vector<cplx> r1(m), r2(m);
          for (std::size_t i = 0; i < m; i += std::max<std::size_t>(1, m / 5)) {
            ref.gram_row(b, i, power, r1.data());
            vec.gram_row(b, i, power, r2.data());
            for (std::size_t j = 0; j < m; ++j) {
              // 1 - <z_i, z_j> cancels for nearby points; scale by its condition number
              const double cond = 1.0 / std::abs(1.0 - herm_inner(cloud.points[i], cloud.points[j]));
              CHECK(std::abs(r1[j] - r2[j]) <= 1e-14 * (1.0 + power * cond) * std::abs(r1[j]));
            }
          }
        }
      }
    }
  }

  TEST_CASE("scalar reference values") {
    const Point pts[] = {Point{0.5}};
    const double w[] = {2.0};
    const AtomBlock b = AtomBlock::build(pts, w);
    const KernelTable& ref = kernels_for(Isa::scalar);
    const cplx at[] = {0.5};
    CHECK(ref.kernel_power_sum(b, at, 2.0) == doctest::Approx(2.0 / 0.5625));
    cplx row[1];
    ref.gram_row(b, 0, 1, row);
    CHECK(row[0].real() == doctest::Approx(2.0 / 0.75));
  }

  TEST_CASE("dispatch honours the environment override") {
    CHECK(!isa_name(kernels().isa).empty());
    CHECK(isa_name(Isa::scalar) == "scalar");
  }
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "jacobi_oracle.hpp"
#include "qmu/errors.hpp"
#include "qmu/spectral.hpp"

using namespace qmu;
using namespace qmu::testing;

TEST_SUITE("spectral") {
  TEST_CASE("applying Q_mu") {
    std::mt19937_64 rng(1);
    const AtomicMeasure mu = random_measure(2, 10, rng);
    CHECK(std::abs(qmu_apply(mu, HoloFunction::constant(2, 1.0), Point::origin(2)) - mu.total_mass()) < 1e-13);
    const HoloFunction f = HoloFunction::monomial(1, {2, 0}) + HoloFunction::kernel(Point{0.3}, 1.5);
    const AtomicMeasure d0 = dirac(Point::origin(1));
    CHECK(std::abs(qmu_apply(d0, f, Point{0.7}) - f(Coords{0.0})) < 1e-15);
    CHECK(std::abs(qmu_apply(dirac(Point{0.5}), HoloFunction::constant(1, 1.0), Point{0.5}) - 4.0 / 3.0) < 1e-15);
    const HoloFunction g = qmu_function(mu, HoloFunction::monomial(2, {1, 1}));
    const Point z{0.2, cplx(0.1, -0.3)};
    CHECK(std::abs(g(z) - qmu_apply(mu, HoloFunction::monomial(2, {1, 1}), z)) < 1e-13);
  }

  TEST_CASE("spectral anchors") {
    const SpectrumResult one = gram_spectrum(dirac(Point::origin(1)));
    REQUIRE(one.eigenvalues.size() == 1);
    CHECK(one.eigenvalues[0] == doctest::Approx(1.0));
    const SpectrumResult r1 = gram_spectrum(dirac(Point{0.6}, 0.5));
    CHECK(std::abs(r1.eigenvalues[0] - 0.78125) <= 1e-12 * 0.78125);
    const SpectrumResult two = gram_spectrum(AtomicMeasure(1, {Point::origin(1), Point{0.5}}, {1.0, 1.0}));
    CHECK(std::abs(two.eigenvalues[0] - (7.0 + std::sqrt(37.0)) / 6.0) < 1e-10);
    CHECK(std::abs(two.eigenvalues[1] - (7.0 - std::sqrt(37.0)) / 6.0) < 1e-10);
    CHECK(op_norm_h2(AtomicMeasure(1, {Point::origin(1), Point{0.5}}, {1.0, 1.0})) ==
          doctest::Approx((7.0 + std::sqrt(37.0)) / 6.0));
    CHECK(gram_spectrum(AtomicMeasure(1)).eigenvalues.empty());
  }

  TEST_CASE("eigenvalues agree with an independent Jacobi oracle") {
    std::mt19937_64 rng(2);
    for (std::size_t n : {1u, 2u}) {
      const AtomicMeasure mu = random_measure(n, 24, rng, 0.9);
      const SpectrumResult s = gram_spectrum(mu);
      const Eigen::MatrixXcd g = gram_matrix(mu);
      std::vector<std::vector<cplx>> a(g.rows(), std::vector<cplx>(g.cols()));
      for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j) a[i][j] = g(i, j);
      const auto ref = jacobi_eigenvalues(a);
      REQUIRE(ref.size() == s.eigenvalues.size());
      for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(ref[k] - s.eigenvalues[k]) < 1e-10 * s.lambda_max());
    }
  }

  TEST_CASE("trace identity, positivity and residual") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
      const std::size_t n = i % 2 ? 2 : 1;
      const AtomicMeasure mu = random_measure(n, 1 + (i * 37) % 200, rng, 0.98);
      const SpectrumResult s = gram_spectrum(mu);
      double direct = 0.0;
      for (std::size_t j = 0; j < mu.size(); ++j)
        direct += mu.weights()[j] * std::pow(1.0 - mu.points()[j].norm_sq(), -double(n));
      double sum = 0.0;
      for (double l : s.eigenvalues) sum += l;
      CHECK(std::abs(sum - direct) <= 1e-10 * direct);
      CHECK(s.min_raw_eigenvalue >= -1e-10 * s.lambda_max());
      CHECK(s.residual <= 1e-10 * s.lambda_max());
      for (std::size_t k = 1; k < s.eigenvalues.size(); ++k) CHECK(s.eigenvalues[k] <= s.eigenvalues[k - 1]);
    }
  }

  TEST_CASE("truncated monomial basis reproduces the Gram spectrum") {
    // <Q_mu z^l, z^k> = sum_j c_j z_j^l conj(z_j)^k on H^2(D)
    std::mt19937_64 rng(4);
    const AtomicMeasure mu = random_measure(1, 6, rng, 0.7);
    const int N = 120;
    std::vector<std::vector<cplx>> a(N, std::vector<cplx>(N));
    for (int k = 0; k < N; ++k)
      for (int l = 0; l < N; ++l)
        for (std::size_t j = 0; j < mu.size(); ++j) {
          const cplx z = mu.points()[j][0];
          a[k][l] += mu.weights()[j] * std::pow(z, l) * std::pow(std::conj(z), k);
        }
    const auto ref = jacobi_eigenvalues(a);
    const SpectrumResult s = gram_spectrum(mu);
    for (std::size_t k = 0; k < s.eigenvalues.size(); ++k) CHECK(ref[k] == doctest::Approx(s.eigenvalues[k]).epsilon(1e-9));
  }

  TEST_CASE("Weyl monotonicity along growth chains") {
    std::mt19937_64 rng(5);
    for (std::size_t n : {1u, 2u}) {
      AtomicMeasure mu(n);
      double prev = 0.0;
      for (int step = 0; step < 30; ++step) {
        mu = mu + random_measure(n, 1, rng, 0.97);
        const double l1 = op_norm_h2(mu);
        CHECK(l1 >= prev * (1.0 - 1e-13));
        prev = l1;
      }
    }
  }

  TEST_CASE("Schatten norms") {
    const AtomicMeasure two(1, {Point::origin(1), Point{0.5}}, {1.0, 1.0});
    CHECK(schatten_norm(two, 1.0) == doctest::Approx(7.0 / 3.0).epsilon(1e-14));
    std::mt19937_64 rng(6);
    const AtomicMeasure mu = random_measure(2, 40, rng);
    double frob = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i)
      for (std::size_t j = 0; j < mu.size(); ++j)
        frob += mu.weights()[i] * mu.weights()[j] *
                std::pow(std::norm(1.0 - herm_inner(mu.points()[i], mu.points()[j])), -2.0);
    CHECK(std::pow(schatten_norm(mu, 2.0), 2) == doctest::Approx(frob).epsilon(1e-11));
    const SpectrumResult s = gram_spectrum(mu);
    double prev = 1e300;
    for (double p : {0.5, 1.0, 1.5, 2.0, 4.0, 8.0}) {
      const double v = schatten_norm(s, p);
      CHECK(v <= prev * (1.0 + 1e-13));
      prev = v;
    }
    CHECK(schatten_norm(s, 1e3) == doctest::Approx(s.lambda_max()).epsilon(0.01));
  }

  TEST_CASE("embedding singular values") {
    CHECK(embedding_singular_values(dirac(Point::origin(1)))[0] == doctest::Approx(1.0));
    std::mt19937_64 rng(7);
    const AtomicMeasure mu = random_measure(1, 12, rng);
    const auto sv = embedding_singular_values(mu);
    const auto ev = gram_spectrum(mu).eigenvalues;
    for (std::size_t k = 0; k < sv.size(); ++k) CHECK(sv[k] * sv[k] == doctest::Approx(ev[k]).epsilon(1e-14));
  }

  TEST_CASE("pairing identity") {
    std::mt19937_64 rng(8);
    CHECK(pairing_check(random_measure(1, 5, rng), Point::origin(1), Point::origin(1)) == 0.0);
    for (int i = 0; i < 100; ++i) {
      const std::size_t n = i % 2 ? 2 : 1;
      const AtomicMeasure mu = random_measure(n, 20, rng);
      CHECK(pairing_check(mu, random_point(n, rng, 0.95), random_point(n, rng, 0.95)) <= 1e-12);
    }
  }

  TEST_CASE("probe lower bounds") {
    std::mt19937_64 rng(9);
    const AtomicMeasure mu = random_measure(1, 10, rng, 0.9);
    const double l1 = op_norm_h2(mu);
    const ProbeResult r = opnorm_probe_hp_hq(mu, 2.0, 2.0);
    CHECK(r.lower_bound <= l1 * (1.0 + 1e-6));
    CHECK(r.lower_bound >= 0.9 * l1);
    CHECK(r.best_probe == "top_eigenvector");
    const ProbeResult r3 = opnorm_probe_hp_hq(mu.scaled(3.0), 2.0, 2.0);
    CHECK(r3.lower_bound == doctest::Approx(3.0 * r.lower_bound).epsilon(1e-12));
    const ProbeResult d = opnorm_probe_hp_hq(dirac(Point::origin(1)), 4.0, 2.0);
    CHECK(d.lower_bound == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(opnorm_probe_hp_hq(mu, 1.0, 2.0), InputError);
  }

  TEST_CASE("compactness tail") {
    CHECK(compactness_tail(dirac(Point{0.3}), 2) == 0.0);
    CHECK_THROWS_AS(compactness_tail(dirac(Point{0.3}), 0), InputError);
    // the first eigenvalue of the critical chain stays bounded below as atoms are added
    double prev = 0.0;
    for (std::size_t count = 4; count <= 16; count += 4) {
      const double l1 = compactness_tail(accumulation(1, count, 1.0), 1);
      CHECK(l1 >= prev);
      CHECK(l1 > 0.5);
      prev = l1;
    }
    // truncations exhaust a finite measure
    std::mt19937_64 rng(10);
    const AtomicMeasure mu = random_measure(1, 15, rng);
    const auto full = gram_spectrum(mu).eigenvalues;
    CHECK(gram_spectrum(mu.truncated(1.0)).eigenvalues == full);
    CHECK(compactness_tail(mu.truncated(0.5), 1) <= full[0]);
  }
}

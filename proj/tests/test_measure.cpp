#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "qmu/errors.hpp"
#include "qmu/measure.hpp"

using namespace qmu;
using namespace qmu::testing;

TEST_SUITE("measure") {
  TEST_CASE("construction, merging and JSON") {
    const AtomicMeasure mu(1, {Point{0.5}, Point{0.5}, Point{0.2}}, {1.0, 2.0, 0.5});
    CHECK(mu.size() == 2);
    CHECK(mu.total_mass() == doctest::Approx(3.5));
    CHECK_THROWS_AS(AtomicMeasure(1, {Point{0.5}}, {0.0}), InputError);
    CHECK_THROWS_AS(AtomicMeasure(2, {Point{0.5}}, {1.0}), InputError);
    const AtomicMeasure near(1, {Point{0.5}, Point{0.5 + 1e-11}}, {1.0, 1.0});
    CHECK(near.size() == 2);
    CHECK(near.merged().size() == 1);
    CHECK(near.merged().total_mass() == doctest::Approx(2.0));
    const AtomicMeasure back = AtomicMeasure::from_json(mu.to_json());
    CHECK(back.size() == 2);
    CHECK(back.points()[1].coords() == mu.points()[1].coords());
    CHECK_THROWS_AS(AtomicMeasure::from_json(nlohmann::json{{"dim", 1}, {"atoms", {{{"z", {2.0, 0.0}}, {"c", 1.0}}}}}),
                    InputError);
  }

  TEST_CASE("measure of regions") {
    const AtomicMeasure d0 = dirac(Point::origin(1));
    CHECK(measure_of_region(d0, KoranyiBox{BoundaryPoint{1.0}, 0.5}) == 0.0);
    CHECK(measure_of_region(d0, QBox{Point::origin(1)}) == 1.0);
    const AtomicMeasure mu(1, {Point::origin(1), Point{0.5}}, {1.0, 2.0});
    CHECK(measure_of_region(mu, BergmanBall{Point::origin(1), 0.2}) == 1.0);
    CHECK_THROWS_AS(measure_of_region(mu, KoranyiBox{BoundaryPoint{1.0}, 3.0}), InputError);
  }

  TEST_CASE("Carleson constants of a point mass") {
    const AtomicMeasure d0 = dirac(Point::origin(1));
    CHECK(carleson_box(d0, 1.0, {}).value == doctest::Approx(1.0));
    CHECK(carleson_kernel(d0, 1.0, 1.0, {}).value == doctest::Approx(1.0));
    for (double c : {0.5, 3.0}) {
      CHECK(carleson_box(d0.scaled(c), 1.0, {}).value == doctest::Approx(c));
      CHECK(carleson_kernel(d0.scaled(c), 1.0, 1.0, {}).value == doctest::Approx(c));
    }
    const CarlesonReport rep = carleson_box(d0, 1.0, {});
    CHECK(rep.refinement_trace.size() == 4);
    CHECK(rep.to_json()["method"] == "box");
    CHECK(rep.csv_row().rfind("box,", 0) == 0);
  }

  TEST_CASE("exact delta supremum against a dense delta oracle") {
    std::mt19937_64 rng(21);
    for (std::size_t n : {1u, 2u}) {
      const AtomicMeasure mu = random_measure(n, 12, rng, 0.97);
      const CarlesonGrid grid{16, 0, 3, 3};
      const CarlesonReport rep = carleson_box(mu, 1.0, grid);
      // oracle: same boundary points, 4000 geometric deltas, strict region counting
      std::vector<BoundaryPoint> zetas = boundary_grid(n, 16, 3);
      for (const auto& p : mu.points()) zetas.push_back(BoundaryPoint::normalized(p.coords()));
      double brute = 0.0;
      for (const auto& zeta : zetas)
        for (int i = 0; i < 4000; ++i) {
          const double delta = 2.0 * std::pow(1e-4, i / 3999.0);
          brute = std::max(brute, measure_of_region(mu, KoranyiBox{zeta, delta}) / std::pow(delta, double(n)));
        }
      CHECK(brute <= rep.value * (1.0 + 1e-12));
      CHECK(brute >= 0.99 * rep.value);
      for (std::size_t i = 1; i < rep.refinement_trace.size(); ++i)
        CHECK(rep.refinement_trace[i] >= rep.refinement_trace[i - 1]);
    }
  }

  TEST_CASE("box and kernel forms are comparable") {
    std::mt19937_64 rng(5);
    double lo = 1e300, hi = 0.0;
    for (std::size_t n : {1u, 2u})
      for (int i = 0; i < 10; ++i) {
        const AtomicMeasure mu = i < 5 ? random_measure(n, 20, rng) : accumulation(n, 6 + i, 1.0);
        const double ratio = carleson_kernel(mu, 1.0, double(n), {}).value / carleson_box(mu, 1.0, {}).value;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
    CHECK(hi / lo < 20.0);
  }

  TEST_CASE("vanishing profiles") {
    const auto zetas = boundary_grid(1, 64, 1);
    const auto ladder = delta_ladder(12);
    const auto p0 = vanishing_profile(dirac(Point::origin(1)), 1.0, ladder, zetas);
    for (const auto& pt : p0)
      if (pt.delta <= 1.0) CHECK(pt.value == 0.0);
    CHECK(vanishing_flag(p0));

    const AtomicMeasure crit = accumulation(1, 14, 1.0);
    const auto pc = vanishing_profile(crit, 1.0, ladder, zetas);
    CHECK_FALSE(vanishing_flag(pc));
    const auto pc3 = vanishing_profile(crit.scaled(3.0), 1.0, ladder, zetas);
    for (std::size_t i = 0; i < pc.size(); ++i) CHECK(pc3[i].value == doctest::Approx(3.0 * pc[i].value));

    const AtomicMeasure fast = accumulation(1, 14, 2.0);
    CHECK(vanishing_flag(vanishing_profile(fast, 1.0, ladder, zetas)));

    const double bad[] = {0.5, 1.0};
    CHECK_THROWS_AS(vanishing_profile(crit, 1.0, bad, zetas), InputError);
  }

  TEST_CASE("tilde mu") {
    const AtomicMeasure d0 = dirac(Point::origin(2));
    const auto nodes = sample_sphere(2, 256, 4);
    for (const auto& z : nodes) CHECK(tilde_mu(d0, z) == doctest::Approx(1.0));
    for (double r : {1.0, 2.0, 4.0}) CHECK(tilde_mu_lr_norm(d0, r, nodes).value == doctest::Approx(1.0));
    CHECK(tilde_mu_lr_norm(d0.scaled(2.5), 4.0, nodes).value == doctest::Approx(2.5));

    std::mt19937_64 rng(6);
    const AtomicMeasure a = random_measure(2, 30, rng), b = random_measure(2, 30, rng);
    for (const auto& z : nodes) {
      CHECK(tilde_mu(a, z, 2.2) <= tilde_mu(a, z, 4.0));
      CHECK(tilde_mu(a + b, z) == doctest::Approx(tilde_mu(a, z) + tilde_mu(b, z)).epsilon(1e-13));
    }
  }

  TEST_CASE("Berezin-type transform") {
    const AtomicMeasure d0 = dirac(Point::origin(1));
    CHECK(berezin_st(d0, 1.0, Point{0.6}) == doctest::Approx(std::pow(0.64, 2.0)));
    std::mt19937_64 rng(9);
    const AtomicMeasure mu = random_measure(2, 10, rng);
    CHECK(berezin_st(mu, 2.0, Point::origin(2)) == doctest::Approx(mu.total_mass()));
    CHECK(berezin_st(dirac(Point{0.5}), 1.0, Point{0.5}) == doctest::Approx(4.0 / 3.0));
    CHECK(t_threshold(1, 0.5) == doctest::Approx(1.0));
    CHECK(t_threshold(2, 4.0) == 0.0);
  }

  TEST_CASE("S_t mu in L^p(lambda_n)") {
    const StNorm d0 = st_lambda_norm(dirac(Point::origin(1)), 1.0, 1.0);
    CHECK(std::abs(d0.value - 1.0) < 3.0 * d0.std_error + 1e-3);
    CHECK(d0.decaying);
    CHECK_THROWS_AS(st_lambda_norm(dirac(Point::origin(1)), 1.0, 0.5), ParameterError);
    CHECK_THROWS_AS(st_lambda_norm(dirac(Point::origin(2)), 2.0, 0.5), ParameterError);

    std::mt19937_64 rng(10);
    const AtomicMeasure mu = random_measure(1, 8, rng, 0.9);
    const StNorm a = st_lambda_norm(mu, 1.0, 2.0);
    const StNorm b = st_lambda_norm(mu.scaled(2.0), 1.0, 2.0);
    CHECK(b.value == doctest::Approx(2.0 * a.value).epsilon(1e-12));
    for (std::size_t i = 1; i < a.refinement_trace.size(); ++i)
      CHECK(a.refinement_trace[i] == doctest::Approx(a.refinement_trace[i - 1]).epsilon(0.05));
  }

  TEST_CASE("lattice sums") {
    LatticeSpec spec;
    spec.r = 0.5;
    spec.cover_radius = 0.9;
    const Lattice L = build_lattice(spec);
    CHECK(lattice_sum(AtomicMeasure(1), L, 1.0) == 0.0);
    // direct count over the covering balls that contain the origin
    double expected = 0.0;
    for (const auto& a : L.centers())
      if (bergman_metric(a, Point::origin(1)) < 0.5) expected += 1.0 / (1.0 - a.norm_sq());
    CHECK(lattice_sum(dirac(Point::origin(1)), L, 1.0) == doctest::Approx(expected).epsilon(1e-14));
    CHECK_THROWS_AS(lattice_sum(dirac(Point{0.99}), L, 1.0), InputError);

    // two independent lattices give comparable sums
    spec.seed = 2;
    spec.candidate_density = 8;
    const Lattice L2 = build_lattice(spec);
    std::mt19937_64 rng(12);
    for (int i = 0; i < 10; ++i) {
      const AtomicMeasure mu = random_measure(1, 15, rng, 0.88);
      for (double p : {0.5, 1.0, 2.0}) {
        const double ratio = lattice_sum(mu, L, p) / lattice_sum(mu, L2, p);
        CHECK(ratio > 0.2);
        CHECK(ratio < 5.0);
      }
    }
  }

  TEST_CASE("I(z) sets") {
    const auto nodes = sample_sphere(2, 20000, 8);
    CHECK(i_set_measure(Point::origin(2), 2.5, nodes) == 1.0);
    CHECK(i_set_measure(Point::origin(2), 1.5, nodes) == 0.0);
    const auto circle = sample_sphere(1, 1 << 16, 0);
    double lo = 1e300, hi = 0.0;
    for (double r : {0.0, 0.3, 0.6, 0.8, 0.9, 0.95, 0.99}) {
      const double ratio = i_set_measure(Point{r}, 2.5, circle) / (1.0 - r * r);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    CHECK(lo > 0.1);
    CHECK(hi < 10.0);
  }

  TEST_CASE("Fubini comparison through approach regions") {
    std::mt19937_64 rng(14);
    const auto nodes = sample_sphere(1, 1 << 14, 0);
    for (int i = 0; i < 10; ++i) {
      const AtomicMeasure mu = random_measure(1, 25, rng, 0.97);
      double lhs = 0.0, rhs = 0.0;
      for (std::size_t j = 0; j < mu.size(); ++j) {
        const double phi = 1.0 + mu.points()[j].norm_sq();
        lhs += phi * mu.weights()[j];
        rhs += phi * mu.weights()[j] / (1.0 - mu.points()[j].norm_sq()) * i_set_measure(mu.points()[j], 2.5, nodes);
      }
      CHECK(rhs / lhs > 0.2);
      CHECK(rhs / lhs < 5.0);
    }
  }

  TEST_CASE("Forelli-Rudin estimates stay bounded along a radius") {
    double hi = 0.0, lo = 1e300;
    QuadratureSpec q;
    q.samples_per_component = 2048;
    for (double r : {0.0, 0.5, 0.9, 0.95, 0.99}) {
      const Estimate e = forelli_rudin_continuous(Point{r}, 0.5, 1.0, q);
      hi = std::max(hi, e.value);
      lo = std::min(lo, e.value);
    }
    CHECK(hi / lo < 10.0);

    LatticeSpec spec;
    spec.r = 0.5;
    spec.cover_radius = 0.995;
    const Lattice L = build_lattice(spec);
    double dhi = 0.0;
    for (double r : {0.0, 0.5, 0.9, 0.95, 0.99}) dhi = std::max(dhi, forelli_rudin_discrete(Point{r}, L.centers(), 2.0, 3.0));
    CHECK(dhi < 1e3);
  }
}

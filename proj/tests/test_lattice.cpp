#include <doctest.h>

#include <random>

#include "qmu/errors.hpp"
#include "qmu/lattice.hpp"

using namespace qmu;

TEST_SUITE("lattice") {
  TEST_CASE("disk lattice certificates") {
    LatticeSpec spec;
    spec.dim = 1;
    spec.r = 0.3;
    spec.cover_radius = 0.9;
    const Lattice L = build_lattice(spec);
    CHECK(L.size() > 10);
    CHECK(L.min_separation() >= 0.15);
    CHECK(L.overlap_bound() >= 1);

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
      const Point z{std::polar(0.9 * std::sqrt(u(rng)), 6.283185307179586 * u(rng))};
      CHECK(L.multiplicity(z, 0.3) >= 1);
      CHECK(L.multiplicity(z, 1.2) <= L.overlap_bound());
    }
  }

  TEST_CASE("ball lattice in two variables") {
    LatticeSpec spec;
    spec.dim = 2;
    spec.r = 0.6;
    spec.candidate_density = 4;
    spec.cover_radius = 0.8;
    spec.validation_samples = 5000;
    const Lattice L = build_lattice(spec);
    CHECK(L.min_separation() >= 0.3);
    CHECK(L.multiplicity(Point::origin(2), 0.6) >= 1);
  }

  TEST_CASE("JSON round trip") {
    LatticeSpec spec;
    spec.r = 0.5;
    spec.cover_radius = 0.7;
    const Lattice L = build_lattice(spec);
    const Lattice back = Lattice::from_json(L.to_json());
    REQUIRE(back.size() == L.size());
    CHECK(back.overlap_bound() == L.overlap_bound());
    for (std::size_t k = 0; k < L.size(); ++k) CHECK(back.centers()[k].coords() == L.centers()[k].coords());
    CHECK_THROWS_AS(Lattice::from_json(nlohmann::json{{"dim", 1}}), InputError);
  }

  TEST_CASE("coarse grids and bad radii are rejected") {
    LatticeSpec spec;
    spec.r = 1.5;
    CHECK_THROWS_AS(build_lattice(spec), InputError);
    spec.r = 0.5;
    spec.candidate_density = 1;
    CHECK_THROWS_AS(build_lattice(spec), InputError);
  }

  TEST_CASE("lattice focused on a point set") {
    std::vector<Point> focus;
    for (int j = 1; j <= 10; ++j) focus.push_back(Point{1.0 - std::ldexp(1.0, -j), 0.0});
    for (std::size_t n : {1u, 2u}) {
      LatticeSpec spec{.dim = n, .r = 0.6, .candidate_density = n == 1 ? 6u : 3u, .validation_samples = 2000};
      for (const auto& f : focus) {
        Coords c(n);
        c[0] = f[0];
        spec.focus.emplace_back(c);
      }
      const Lattice L = build_lattice(spec);
      CHECK(L.cover_radius() == 0.0);
      CHECK(L.min_separation() >= 0.3);
      for (const auto& f : spec.focus) CHECK(L.multiplicity(f, 0.6) >= 1);
      // every center lies near the focus set
      for (const auto& a : L.centers()) {
        double best = 1e300;
        for (const auto& f : spec.focus) best = std::min(best, bergman_metric(a, f));
        CHECK(best <= 1.2 + 0.6 / static_cast<double>(spec.candidate_density) + 1e-9);
      }
      MESSAGE("n = " << n << ": " << L.size() << " centers, N = " << L.overlap_bound());
    }
  }
}

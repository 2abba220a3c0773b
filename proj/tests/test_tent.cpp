#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "qmu/errors.hpp"
#include "qmu/sampling.hpp"
#include "qmu/tent.hpp"

using namespace qmu;

namespace {

const Lattice& fixture_lattice() {
  static const Lattice z = build_lattice({.dim = 1, .r = 0.5, .cover_radius = 0.9});
  return z;
}

TentSequence random_sequence(std::size_t size, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  TentSequence s;
  for (std::size_t k = 0; k < size; ++k) s.values.emplace_back(g(rng), g(rng));
  return s;
}

// direct evaluation through region membership
double oracle_norm(const TentSequence& l, const Lattice& z, double p, double q, std::span<const BoundaryPoint> nodes,
                   double gamma) {
  double sum = 0.0;
  for (const auto& zeta : nodes) {
    double inner = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
      if (!region_contains(ApproachRegion{gamma, zeta}, z.centers()[k])) continue;
      const double a = std::abs(l.values[k]);
      inner = q == kInfinity ? std::max(inner, a) : inner + std::pow(a, q);
    }
    sum += q == kInfinity ? std::pow(inner, p) : std::pow(inner, p / q);
  }
  return std::pow(sum / static_cast<double>(nodes.size()), 1.0 / p);
}

}  // namespace

TEST_SUITE("tent") {
  TEST_CASE("single center at the origin") {
    const Lattice z(1, 0.5, {Point::origin(1)}, 1, 0.0);
    const TentSequence one{{1.0}};
    const auto nodes = sample_sphere(1, 64, 1);
    for (double p : {0.5, 1.0, 2.0, 4.0})
      for (double q : {0.5, 1.0, 2.0, kInfinity}) CHECK(tent_norm(one, z, p, q, nodes).value == doctest::Approx(1.0));
    CHECK(tent_pairing(one, one, z) == cplx(1.0));
    const HoloFunction f = synthesis(one, z, 2.0);
    CHECK(f.atoms().empty());
    CHECK(std::abs(f(Coords{0.3}) - 1.0) < 1e-15);
  }

  TEST_CASE("zero sequence and empty regions") {
    const Lattice& z = fixture_lattice();
    const auto nodes = sample_sphere(1, 32, 1);
    CHECK(tent_norm(TentSequence{std::vector<cplx>(z.size())}, z, 2.0, 2.0, nodes).value == 0.0);
    const Lattice edge(1, 0.5, {Point{0.9}}, 1, 0.9);
    const TentNorm e = tent_norm(TentSequence{{1.0}}, edge, 2.0, 2.0, std::vector<BoundaryPoint>{BoundaryPoint{-1.0}});
    CHECK(e.value == 0.0);
    CHECK(e.warnings.size() == 1);
    CHECK_THROWS_AS(tent_norm(TentSequence{{1.0, 2.0}}, edge, 2.0, 2.0, nodes), InputError);
    CHECK_THROWS_AS(tent_pairing(TentSequence{{1.0}}, TentSequence{}, edge), InputError);
  }

  TEST_CASE("matches direct membership evaluation") {
    const Lattice& z = fixture_lattice();
    std::mt19937_64 rng(1);
    const TentSequence l = random_sequence(z.size(), rng);
    const auto nodes = sample_sphere(1, 256, 3);
    for (double p : {1.0, 2.0, 3.0})
      for (double q : {1.0, 2.0, kInfinity})
        CHECK(tent_norm(l, z, p, q, nodes, 2.5).value ==
              doctest::Approx(oracle_norm(l, z, p, q, nodes, 2.5)).epsilon(1e-12));
  }

  TEST_CASE("homogeneity and monotonicity") {
    const Lattice& z = fixture_lattice();
    std::mt19937_64 rng(2);
    const auto nodes = sample_sphere(1, 128, 1);
    TentSequence l = random_sequence(z.size(), rng);
    for (double q : {1.0, 2.0, kInfinity}) {
      const double base = tent_norm(l, z, 2.0, q, nodes).value;
      TentSequence scaled = l;
      for (auto& v : scaled.values) v *= cplx(0.0, -3.0);
      CHECK(tent_norm(scaled, z, 2.0, q, nodes).value == doctest::Approx(3.0 * base).epsilon(1e-13));
      std::uniform_int_distribution<std::size_t> pick(0, z.size() - 1);
      TentSequence up = l;
      double prev = base;
      for (int i = 0; i < 20; ++i) {
        up.values[pick(rng)] *= 1.5;
        const double v = tent_norm(up, z, 2.0, q, nodes).value;
        CHECK(v >= prev);
        prev = v;
      }
    }
  }

  TEST_CASE("aperture stability") {
    const Lattice& z = fixture_lattice();
    std::mt19937_64 rng(3);
    const auto nodes = sample_sphere(1, 256, 1);
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < 20; ++i) {
      const TentSequence l = random_sequence(z.size(), rng);
      const double r = tent_norm(l, z, 2.0, 2.0, nodes, 4.0).value / tent_norm(l, z, 2.0, 2.0, nodes, 2.2).value;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    MESSAGE("aperture ratio band [" << lo << ", " << hi << "]");
    // frozen band for this lattice and node set
    CHECK(lo >= 1.2);
    CHECK(hi <= 2.0);
  }

  TEST_CASE("Hoelder-type pairing bound") {
    const Lattice& z = fixture_lattice();
    std::mt19937_64 rng(4);
    const auto nodes = sample_sphere(1, 512, 1);
    double worst = 0.0;
    for (double p : {1.5, 2.0, 4.0}) {
      const double pp = p / (p - 1.0);
      for (int i = 0; i < 20; ++i) {
        const TentSequence l = random_sequence(z.size(), rng), m = random_sequence(z.size(), rng);
        const double r = std::abs(tent_pairing(l, m, z)) /
                         (tent_norm(l, z, p, 1.0, nodes).value * tent_norm(m, z, pp, kInfinity, nodes).value);
        worst = std::max(worst, r);
      }
    }
    MESSAGE("pairing constant " << worst);
    CHECK(worst <= 0.5);  // frozen empirical constant
  }

  TEST_CASE("synthesis") {
    const Lattice& z = fixture_lattice();
    std::mt19937_64 rng(5);
    const TentSequence a = random_sequence(z.size(), rng), b = random_sequence(z.size(), rng);
    TentSequence ab = a;
    for (std::size_t k = 0; k < ab.size(); ++k) ab.values[k] += b.values[k];
    const HoloFunction lhs = synthesis(ab, z, 3.0), rhs = synthesis(a, z, 3.0) + synthesis(b, z, 3.0);
    CHECK(lhs.atoms().size() == rhs.atoms().size());
    for (int i = 0; i < 10; ++i) {
      const Coords w{cplx(0.1 * i - 0.45, 0.03 * i)};
      CHECK(std::abs(lhs(w) - rhs(w)) <= 1e-12 * (1.0 + std::abs(lhs(w))));
    }
    CHECK(synthesis_threshold(2, 1.0) == 4.0);
    CHECK(synthesis_threshold(1, 4.0) == 1.0);
    CHECK_THROWS_AS(synthesis(a, z, 0.0), InputError);
  }

  TEST_CASE("synthesis is bounded from T^p_2 into H^p") {
    const Lattice& z = fixture_lattice();
    std::mt19937_64 rng(6);
    const auto nodes = sample_sphere(1, 2048, 1);
    for (double p : {1.5, 2.0, 4.0}) {
      const double b = synthesis_threshold(1, p) + 1.0;
      double lo = 1e300, hi = 0.0;
      for (int i = 0; i < 10; ++i) {
        const TentSequence l = random_sequence(z.size(), rng);
        const double r = hardy_norm(synthesis(l, z, b), p, nodes).value / tent_norm(l, z, p, 2.0, nodes).value;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      MESSAGE("p = " << p << " synthesis ratio [" << lo << ", " << hi << "]");
      CHECK(lo >= 1.0);
      CHECK(hi <= 4.0);
    }
  }

  TEST_CASE("json round trip") {
    const TentSequence s{{cplx(1.0, -2.0), cplx(0.5, 0.0)}};
    CHECK(TentSequence::from_json(s.to_json()).values == s.values);
    CHECK_THROWS_AS(TentSequence::from_json(nlohmann::json::object()), InputError);
  }
}

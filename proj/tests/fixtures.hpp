#pragma once
// Shared measure fixtures for the unit tests.

#include <cmath>
#include <random>

#include "qmu/measure.hpp"

namespace qmu::testing {

inline Point random_point(std::size_t n, std::mt19937_64& rng, double max_radius) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Coords c(n);
  for (std::size_t k = 0; k < n; ++k) c[k] = cplx(g(rng), g(rng));
  return Point((max_radius * std::pow(u(rng), 1.0 / (2.0 * n)) / std::sqrt(c.norm_sq())) * c);
}

inline AtomicMeasure random_measure(std::size_t n, std::size_t atoms, std::mt19937_64& rng, double max_radius = 0.95) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<Point> p;
  std::vector<double> w;
  for (std::size_t j = 0; j < atoms; ++j) {
    p.push_back(random_point(n, rng, max_radius));
    w.push_back(u(rng));
  }
  return AtomicMeasure(n, std::move(p), std::move(w));
}

inline AtomicMeasure dirac(const Point& z, double c = 1.0) { return AtomicMeasure(z.dim(), {z}, {c}); }

/// Atoms (1 - 2^{-j}) e_1 with masses (2^{-j})^{n rate}, j = 1..count.
inline AtomicMeasure accumulation(std::size_t n, std::size_t count, double rate) {
  std::vector<Point> p;
  std::vector<double> w;
  for (std::size_t j = 1; j <= count; ++j) {
    const double h = std::ldexp(1.0, -static_cast<int>(j));
    Coords c(n);
    c[0] = 1.0 - h;
    p.emplace_back(c);
    w.push_back(std::pow(h, static_cast<double>(n) * rate));
  }
  return AtomicMeasure(n, std::move(p), std::move(w));
}

}  // namespace qmu::testing

#pragma once
// Seeded quadrature for the normalized surface measure sigma on S_n and the
// normalized volume measure v on B_n, plus samplers for approach regions and
// Koranyi boxes.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qmu/geometry.hpp"

namespace qmu {

/// Sphere nodes with equal weights 1/m. n = 1: the grid e^{2 pi i k/m};
/// n >= 2: normalized Gaussian vectors from the seed.
std::vector<BoundaryPoint> sample_sphere(std::size_t n, std::size_t m, std::uint64_t seed);

/// Radial shells with edges 0, 1/2, 3/4, ..., 1 - 2^{-(S-1)}, 1.
class ShellLayout {
 public:
  ShellLayout(std::size_t dim, std::size_t shells);

  std::size_t dim() const { return dim_; }
  std::size_t shells() const { return shells_; }
  double inner_radius(std::size_t j) const;
  double outer_radius(std::size_t j) const;
  /// v({inner <= |z| < outer}) = outer^{2n} - inner^{2n}
  double volume(std::size_t j) const;
  /// Shell containing a point with 1 - |z|^2 = depth.
  std::size_t shell_of_depth(double depth) const;

 private:
  std::size_t dim_;
  std::size_t shells_;
};

struct BallSample {
  Point point;
  double weight;
  std::size_t shell;
};

/// m samples split evenly over the shells, radius stratified within each
/// shell and directions uniform. Weights sum to v(B_n) = 1.
std::vector<BallSample> sample_ball(std::size_t n, std::size_t m, std::size_t shells, std::uint64_t seed);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Stratified estimate of the integral of f against dv from sample_ball output.
Estimate ball_estimate(std::span<const BallSample> samples, const std::function<double(const Point&)>& f);

struct QuadratureSpec {
  std::size_t samples_per_component = 256;
  std::size_t shells = 16;
  std::uint64_t seed = 1;
  /// Per-shell decay ratio at or above which the tail is declared divergent.
  double divergence_ratio = 0.8;
};

struct BallIntegral {
  double value = 0.0;
  double std_error = 0.0;
  /// Contribution of each radial shell to value.
  std::vector<double> shell_contributions;
  /// Geometric-mean ratio between consecutive outer shell contributions.
  double tail_ratio = 0.0;
  bool decaying = true;
};

/// Integral of f against dv by multiple importance sampling. Components are
/// the shell sampler and its pushforwards under the automorphisms phi_a for
/// each anchor a, combined with the balance heuristic. Anchors should sit
/// where f concentrates.
BallIntegral integrate_ball(std::size_t n, const std::function<double(const Point&)>& f,
                            std::span<const Point> anchors, const QuadratureSpec& spec);

/// Integral of f against dv after the change of variables z = phi_c(xi),
/// evaluated on fixed samples of xi.
double integrate_ball_shifted(const std::function<double(const Point&)>& f, const Point& center,
                              std::span<const BallSample> base);

/// Samples of Gamma_gamma(zeta) truncated at |z| <= 1 - eps, with weights
/// for dv. Layered by depth 1 - |z|^2 in dyadic bands; per_layer proposals
/// per band, rejected proposals dropped.
std::vector<BallSample> sample_approach_region(const BoundaryPoint& zeta, double gamma, double eps,
                                               std::size_t per_layer, std::uint64_t seed);

/// Deterministic grid on Gamma_gamma(zeta) truncated at |z| <= 1 - eps.
/// Doubling resolution yields a superset of the previous grid.
std::vector<Point> approach_region_grid(const BoundaryPoint& zeta, double gamma, double eps, std::size_t resolution);

/// Uniform samples of the Koranyi box B_delta(zeta) (rejection from a
/// bounding cylinder). Returns exactly count points.
std::vector<Point> sample_koranyi_box(const BoundaryPoint& zeta, double delta, std::size_t count, std::uint64_t seed);

}  // namespace qmu

#pragma once
// Finite atomic measures on B_n and the quantities attached to them:
// Carleson constants, vanishing profiles, the area-type function mu~, the
// Berezin-type transform S_t mu and lattice sums.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmu/geometry.hpp"
#include "qmu/lattice.hpp"
#include "qmu/sampling.hpp"
#include "qmu/simd/kernels.hpp"

namespace qmu {

/// Points closer than this are merged before any Gram matrix is formed.
inline constexpr double kMergeTolerance = 1e-9;

class AtomicMeasure {
 public:
  explicit AtomicMeasure(std::size_t dim);
  /// Exact duplicate points are merged by adding weights. Weights must be
  /// positive and finite.
  AtomicMeasure(std::size_t dim, std::vector<Point> points, std::vector<double> weights);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const simd::AtomBlock& block() const { return block_; }

  double total_mass() const;
  /// max |z_j| (0 for the empty measure)
  double max_radius() const;

  AtomicMeasure scaled(double c) const;
  /// Atoms with |z_j| <= radius.
  AtomicMeasure truncated(double radius) const;
  /// Atoms within |z_i - z_j| < tol collapsed onto the heavier one.
  AtomicMeasure merged(double tol = kMergeTolerance) const;

  nlohmann::json to_json() const;
  static AtomicMeasure from_json(const nlohmann::json& j);

 private:
  std::size_t dim_;
  std::vector<Point> points_;
  std::vector<double> weights_;
  simd::AtomBlock block_;
};

AtomicMeasure operator+(const AtomicMeasure& a, const AtomicMeasure& b);

double measure_of_region(const AtomicMeasure& mu, const RegionSpec& region);

/// Boundary directions: the grid e^{2 pi i k/m} for n = 1, a seeded
/// Gaussian prefix for n >= 2 (so growing m gives nested sets).
std::vector<BoundaryPoint> boundary_grid(std::size_t n, std::size_t m, std::uint64_t seed);

struct CarlesonGrid {
  /// Boundary directions at the coarsest level.
  std::size_t directions = 64;
  /// Number of grid doublings reported in the refinement trace.
  std::size_t refinements = 3;
  std::uint64_t seed = 1;
  /// Extra radial levels beyond the deepest atom (kernel method).
  std::size_t extra_depth = 3;
};

enum class CarlesonMethod { box, kernel };

struct CarlesonReport {
  double s = 1.0;
  CarlesonMethod method = CarlesonMethod::box;
  double t = 0.0;
  double value = 0.0;
  /// Where the supremum was attained: boundary point (box) or ball point (kernel).
  std::vector<double> argmax;
  /// Attaining delta (box) or 1 - |a| (kernel).
  double argmax_scale = 0.0;
  std::string grid_spec;
  std::vector<double> refinement_trace;

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// Box form sup mu(B_delta(zeta)) / delta^{ns}. The supremum over delta in
/// (0, 2] is exact for each zeta; zeta ranges over the grid plus the
/// directions of the atoms.
CarlesonReport carleson_box(const AtomicMeasure& mu, double s, const CarlesonGrid& grid);

/// Kernel form sup_a (1-|a|^2)^t integral |1-<a,z>|^{-(ns+t)} dmu(z), with a
/// over the atoms, the origin and a radial-angular grid.
CarlesonReport carleson_kernel(const AtomicMeasure& mu, double s, double t, const CarlesonGrid& grid);

CarlesonReport carleson_constant(const AtomicMeasure& mu, double s, CarlesonMethod method, double t,
                                 const CarlesonGrid& grid);

struct ProfilePoint {
  double delta;
  double value;
};

/// (delta, sup_zeta mu(B_delta(zeta)) / delta^{ns}) for a decreasing delta grid.
std::vector<ProfilePoint> vanishing_profile(const AtomicMeasure& mu, double s, std::span<const double> deltas,
                                            std::span<const BoundaryPoint> zetas);

/// Vanishing when the profile is identically zero or its maximum over the
/// last third of the grid is at most `drop` times its overall maximum.
bool vanishing_flag(std::span<const ProfilePoint> profile, double drop = 0.25);

/// Geometric ladder 2 * 2^{-j}, j = 0..levels-1.
std::vector<double> delta_ladder(std::size_t levels);

/// sum over z_j in Gamma_gamma(zeta) of c_j (1-|z_j|^2)^{-n}
double tilde_mu(const AtomicMeasure& mu, const BoundaryPoint& zeta, double gamma = kDefaultAperture);

/// ||mu~||_{L^r(sigma)} over equal-weight sphere nodes.
Estimate tilde_mu_lr_norm(const AtomicMeasure& mu, double r, std::span<const BoundaryPoint> nodes,
                          double gamma = kDefaultAperture);

/// t_p = max(n/p - n, 0)
double t_threshold(std::size_t n, double p);

/// S_t mu(w) = (1-|w|^2)^{n+t} integral |1-<z,w>|^{-(2n+t)} dmu(z)
double berezin_st(const AtomicMeasure& mu, double t, const Point& w);

struct StNormSpec {
  QuadratureSpec quadrature;
  /// Number of sample-size doublings in the refinement trace.
  std::size_t refinements = 2;
  /// At most this many atoms (largest c_j (1-|z_j|^2)^{-n}) serve as anchors.
  std::size_t max_anchors = 128;
};

struct StNorm {
  /// ||S_t mu||_{L^p(lambda_n)}
  double value = 0.0;
  /// integral of (S_t mu)^p dlambda_n
  double pth_power = 0.0;
  double std_error = 0.0;
  /// pth_power at each sample size
  std::vector<double> refinement_trace;
  bool decaying = true;
  double tail_ratio = 0.0;
  std::vector<std::string> warnings;
};

/// Throws ParameterError unless t > t_p.
StNorm st_lambda_norm(const AtomicMeasure& mu, double t, double p, const StNormSpec& spec = {});

/// sum_k (mu(D(a_k, r)) / (1-|a_k|^2)^n)^p. Throws InputError if some atom
/// lies in no ball D(a_k, r).
double lattice_sum(const AtomicMeasure& mu, const Lattice& lattice, double p);

/// Fraction of the sphere nodes zeta with z in Gamma_gamma(zeta).
double i_set_measure(const Point& z, double gamma, std::span<const BoundaryPoint> nodes);

/// (1-|z|^2)^s integral (1-|w|^2)^t |1-<z,w>|^{-(n+1+t+s)} dv(w), t > -1, s > 0.
Estimate forelli_rudin_continuous(const Point& z, double t, double s, const QuadratureSpec& spec = {});

/// (1-|z|^2)^{s-t} sum_k (1-|a_k|^2)^t |1-<z,a_k>|^{-s} over a separated sequence.
double forelli_rudin_discrete(const Point& z, std::span<const Point> centers, double t, double s);

}  // namespace qmu

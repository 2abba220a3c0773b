#pragma once
// Geometry of the unit ball B_n and sphere S_n in C^n.

#include <array>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <variant>

namespace qmu {

using cplx = std::complex<double>;

/// Largest complex dimension the fixed-capacity coordinate storage holds.
inline constexpr std::size_t kMaxDim = 4;

/// Default aperture of the admissible approach regions.
inline constexpr double kDefaultAperture = 2.5;

/// Raw vector in C^n with inline storage.
class Coords {
 public:
  Coords() = default;
  explicit Coords(std::size_t dim);
  Coords(std::initializer_list<cplx> values);
  explicit Coords(std::span<const cplx> values);

  std::size_t dim() const { return dim_; }
  cplx& operator[](std::size_t k) { return c_[k]; }
  const cplx& operator[](std::size_t k) const { return c_[k]; }
  std::span<const cplx> span() const { return {c_.data(), dim_}; }
  const cplx* data() const { return c_.data(); }

  double norm_sq() const;

  Coords& operator+=(const Coords& o);
  Coords& operator-=(const Coords& o);
  Coords& operator*=(cplx s);

 private:
  std::array<cplx, kMaxDim> c_{};
  std::size_t dim_ = 0;
};

Coords operator+(Coords a, const Coords& b);
Coords operator-(Coords a, const Coords& b);
Coords operator*(cplx s, Coords a);
bool operator==(const Coords& a, const Coords& b);

/// A point of the open ball, |z| < 1.
class Point {
 public:
  /// Throws InputError unless 1 <= dim <= kMaxDim and |z|^2 < 1.
  explicit Point(const Coords& c);
  Point(std::initializer_list<cplx> values) : Point(Coords(values)) {}

  static Point origin(std::size_t dim);

  const Coords& coords() const { return c_; }
  operator const Coords&() const { return c_; }  // NOLINT(google-explicit-constructor)
  std::size_t dim() const { return c_.dim(); }
  const cplx& operator[](std::size_t k) const { return c_[k]; }
  double norm_sq() const { return norm_sq_; }
  double norm() const;

 private:
  Coords c_;
  double norm_sq_ = 0.0;
};

/// A point of the unit sphere, | |zeta|^2 - 1 | <= 1e-12.
class BoundaryPoint {
 public:
  explicit BoundaryPoint(const Coords& c);
  BoundaryPoint(std::initializer_list<cplx> values) : BoundaryPoint(Coords(values)) {}

  /// Rescales a nonzero vector onto the sphere.
  static BoundaryPoint normalized(const Coords& c);
  /// (1, 0, ..., 0)
  static BoundaryPoint pole(std::size_t dim);

  const Coords& coords() const { return c_; }
  operator const Coords&() const { return c_; }  // NOLINT(google-explicit-constructor)
  std::size_t dim() const { return c_.dim(); }
  const cplx& operator[](std::size_t k) const { return c_[k]; }

 private:
  Coords c_;
};

/// <z, w> = sum_k z_k conj(w_k). Throws InputError on dimension mismatch.
cplx herm_inner(const Coords& z, const Coords& w);

/// 1 - |phi_z(w)|^2 = (1-|z|^2)(1-|w|^2) / |1-<z,w>|^2, in (0, 1].
double mobius_closeness(const Point& z, const Point& w);

/// |phi_z(w)|^2, the squared pseudo-hyperbolic distance.
double pseudo_hyperbolic_sq(const Point& z, const Point& w);

/// beta(z,w) = 1/2 log((1+|phi_z(w)|)/(1-|phi_z(w)|)).
double bergman_metric(const Point& z, const Point& w);

/// Pseudo-hyperbolic radius tanh(beta) of a Bergman ball of radius beta.
double pseudo_radius(double beta);

/// The involutive automorphism phi_a of B_n exchanging a and 0.
Coords mobius(const Point& a, const Coords& z);
Point mobius(const Point& a, const Point& z);

/// Real Jacobian of phi_a at z: ((1-|a|^2)/|1-<z,a>|^2)^{n+1}.
double mobius_jacobian(const Point& a, const Coords& z);

/// Completes zeta to an orthonormal basis {zeta, e_2, ..., e_n} (n <= 2).
std::array<Coords, kMaxDim> unitary_frame(const BoundaryPoint& zeta);

struct ApproachRegion {
  double gamma;
  BoundaryPoint zeta;
};
struct KoranyiBox {
  BoundaryPoint zeta;
  double delta;
};
struct QBox {
  Point w;
};
struct BergmanBall {
  Point a;
  double radius;
};

/// Gamma_gamma(zeta), B_delta(zeta), Q(w) or D(a, rho).
using RegionSpec = std::variant<ApproachRegion, KoranyiBox, QBox, BergmanBall>;

/// Throws InputError for gamma <= 1, delta outside (0, 2], radius <= 0.
void validate_region(const RegionSpec& region);

/// Strict membership test; ties on the boundary resolve to outside.
bool region_contains(const RegionSpec& region, const Point& z);

}  // namespace qmu

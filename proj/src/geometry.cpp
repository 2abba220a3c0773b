#include "qmu/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qmu/errors.hpp"

namespace qmu {

Coords::Coords(std::size_t dim) : dim_(dim) {
  if (dim > kMaxDim) throw InputError("dimension " + std::to_string(dim) + " exceeds capacity");
}

Coords::Coords(std::initializer_list<cplx> values) : Coords(std::span<const cplx>(values.begin(), values.size())) {}

Coords::Coords(std::span<const cplx> values) : Coords(values.size()) {
  std::copy(values.begin(), values.end(), c_.begin());
}

double Coords::norm_sq() const {
  double s = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) s += std::norm(c_[k]);
  return s;
}

Coords& Coords::operator+=(const Coords& o) {
  if (o.dim_ != dim_) throw InputError("dimension mismatch");
  for (std::size_t k = 0; k < dim_; ++k) c_[k] += o.c_[k];
  return *this;
}

Coords& Coords::operator-=(const Coords& o) {
  if (o.dim_ != dim_) throw InputError("dimension mismatch");
  for (std::size_t k = 0; k < dim_; ++k) c_[k] -= o.c_[k];
  return *this;
}

Coords& Coords::operator*=(cplx s) {
  for (std::size_t k = 0; k < dim_; ++k) c_[k] *= s;
  return *this;
}

Coords operator+(Coords a, const Coords& b) { return a += b; }
Coords operator-(Coords a, const Coords& b) { return a -= b; }
Coords operator*(cplx s, Coords a) { return a *= s; }

bool operator==(const Coords& a, const Coords& b) {
  if (a.dim() != b.dim()) return false;
  for (std::size_t k = 0; k < a.dim(); ++k)
    if (a[k] != b[k]) return false;
  return true;
}

Point::Point(const Coords& c) : c_(c), norm_sq_(c.norm_sq()) {
  if (c.dim() == 0) throw InputError("point of dimension 0");
  if (!(norm_sq_ < 1.0)) throw InputError("point outside the open unit ball (|z|^2 = " + std::to_string(norm_sq_) + ")");
}

Point Point::origin(std::size_t dim) { return Point(Coords(dim)); }

double Point::norm() const { return std::sqrt(norm_sq_); }

BoundaryPoint::BoundaryPoint(const Coords& c) : c_(c) {
  if (c.dim() == 0) throw InputError("boundary point of dimension 0");
  if (std::abs(c.norm_sq() - 1.0) > 1e-12) throw InputError("boundary point off the unit sphere");
}

BoundaryPoint BoundaryPoint::normalized(const Coords& c) {
  const double r = std::sqrt(c.norm_sq());
  if (!(r > 0.0)) throw InputError("cannot normalize the zero vector");
  return BoundaryPoint((1.0 / r) * c);
}

BoundaryPoint BoundaryPoint::pole(std::size_t dim) {
  Coords c(dim);
  c[0] = 1.0;
  return BoundaryPoint(c);
}

cplx herm_inner(const Coords& z, const Coords& w) {
  if (z.dim() != w.dim()) throw InputError("herm_inner: dimension mismatch");
  cplx s = 0.0;
  for (std::size_t k = 0; k < z.dim(); ++k) s += z[k] * std::conj(w[k]);
  return s;
}

double mobius_closeness(const Point& z, const Point& w) {
  const double d = std::norm(1.0 - herm_inner(z, w));
  return std::min(1.0, (1.0 - z.norm_sq()) * (1.0 - w.norm_sq()) / d);
}

double pseudo_hyperbolic_sq(const Point& z, const Point& w) { return 1.0 - mobius_closeness(z, w); }

double bergman_metric(const Point& z, const Point& w) {
  const double s = mobius_closeness(z, w);
  const double rho = std::sqrt(std::max(0.0, 1.0 - s));
  // log((1+rho)/(1-rho))/2 == log((1+rho)/sqrt(s)) with 1 - rho^2 = s.
  return std::log((1.0 + rho) / std::sqrt(s));
}

double pseudo_radius(double beta) { return std::tanh(beta); }

Coords mobius(const Point& a, const Coords& z) {
  const std::size_t n = a.dim();
  if (z.dim() != n) throw InputError("mobius: dimension mismatch");
  const double a2 = a.norm_sq();
  const cplx za = herm_inner(z, a);
  Coords out(n);
  if (a2 == 0.0) {
    for (std::size_t k = 0; k < n; ++k) out[k] = -z[k];
    return out;
  }
  const double sa = std::sqrt(1.0 - a2);
  const cplx denom = 1.0 - za;
  for (std::size_t k = 0; k < n; ++k) {
    const cplx pz = za * a[k] / a2;
    const cplx qz = z[k] - pz;
    out[k] = (a[k] - pz - sa * qz) / denom;
  }
  return out;
}

Point mobius(const Point& a, const Point& z) {
  Coords c = mobius(a, z.coords());
  // Rounding can push images of points very near the sphere onto it.
  const double r2 = c.norm_sq();
  if (!(r2 < 1.0)) c *= (1.0 - 1e-16) / std::sqrt(r2);
  return Point(c);
}

double mobius_jacobian(const Point& a, const Coords& z) {
  const double ratio = (1.0 - a.norm_sq()) / std::norm(1.0 - herm_inner(z, a));
  return std::pow(ratio, static_cast<double>(a.dim() + 1));
}

std::array<Coords, kMaxDim> unitary_frame(const BoundaryPoint& zeta) {
  std::array<Coords, kMaxDim> frame{};
  frame[0] = zeta.coords();
  if (zeta.dim() == 2) {
    frame[1] = Coords{-std::conj(zeta[1]), std::conj(zeta[0])};
  } else if (zeta.dim() > 2) {
    throw InputError("unitary_frame: only n <= 2 supported");
  }
  return frame;
}

void validate_region(const RegionSpec& region) {
  std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ApproachRegion>) {
          if (!(r.gamma > 1.0)) throw InputError("approach region needs gamma > 1");
        } else if constexpr (std::is_same_v<T, KoranyiBox>) {
          if (!(r.delta > 0.0 && r.delta <= 2.0)) throw InputError("Koranyi box needs delta in (0, 2]");
        } else if constexpr (std::is_same_v<T, BergmanBall>) {
          if (!(r.radius > 0.0)) throw InputError("Bergman ball needs a positive radius");
        }
      },
      region);
}

bool region_contains(const RegionSpec& region, const Point& z) {
  return std::visit(
      [&z](const auto& r) -> bool {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ApproachRegion>) {
          return std::abs(1.0 - herm_inner(z, r.zeta)) < 0.5 * r.gamma * (1.0 - z.norm_sq());
        } else if constexpr (std::is_same_v<T, KoranyiBox>) {
          return std::abs(1.0 - herm_inner(z, r.zeta)) < r.delta;
        } else if constexpr (std::is_same_v<T, QBox>) {
          if (r.w.norm_sq() == 0.0) return true;
          const double wn = r.w.norm();
          const BoundaryPoint zeta_w = BoundaryPoint::normalized(r.w.coords());
          return std::abs(1.0 - herm_inner(z, zeta_w)) < 1.0 - wn;
        } else {
          return bergman_metric(r.a, z) < r.radius;
        }
      },
      region);
}

}  // namespace qmu

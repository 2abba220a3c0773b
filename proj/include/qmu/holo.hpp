#pragma once
// Holomorphic functions on B_n given by a polynomial part plus finitely many
// kernel-power atoms c (1 - <z,a>)^{-beta}. The class is closed under the
// radial derivative R and the fractional operators R^{alpha,t}, R_{alpha,t}.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <json.hpp>

#include "qmu/geometry.hpp"
#include "qmu/sampling.hpp"

namespace qmu {

/// Largest exponent allowed per variable in the polynomial part.
inline constexpr int kMaxDegree = 64;

/// Exponent vector (alpha_1, ..., alpha_n); unused slots are zero.
using MultiIndex = std::array<int, kMaxDim>;

struct KernelAtom {
  cplx c;
  Point a;
  double beta;
};

class HoloFunction {
 public:
  explicit HoloFunction(std::size_t dim);

  static HoloFunction constant(std::size_t dim, cplx value);
  /// c z^alpha
  static HoloFunction monomial(std::size_t dim, const MultiIndex& alpha, cplx c = 1.0);
  /// c (1 - <z,a>)^{-beta}
  static HoloFunction kernel(const Point& a, double beta, cplx c = 1.0);
  /// Reproducing kernel of H^2: K_a(z) = (1 - <z,a>)^{-n}.
  static HoloFunction szego_kernel(const Point& a) { return kernel(a, static_cast<double>(a.dim())); }

  std::size_t dim() const { return dim_; }
  const std::map<MultiIndex, cplx>& poly() const { return poly_; }
  const std::vector<KernelAtom>& atoms() const { return atoms_; }
  bool is_zero() const { return poly_.empty() && atoms_.empty(); }
  /// Largest total degree of the polynomial part (-1 when empty).
  int degree() const;

  void add_monomial(const MultiIndex& alpha, cplx c);
  /// Atoms based at the origin are folded into the constant term.
  void add_atom(cplx c, const Point& a, double beta);

  HoloFunction& operator+=(const HoloFunction& g);
  HoloFunction& operator*=(cplx s);

  /// Evaluates at a point of the closed ball. Throws DomainError if z sits
  /// on a pole and InputError if |z| > 1.
  cplx operator()(const Coords& z) const;

  nlohmann::json to_json() const;
  static HoloFunction from_json(const nlohmann::json& j);

 private:
  void prune();

  std::size_t dim_;
  std::map<MultiIndex, cplx> poly_;
  std::vector<KernelAtom> atoms_;
};

HoloFunction operator+(HoloFunction f, const HoloFunction& g);
HoloFunction operator*(cplx s, HoloFunction f);

/// Rf = sum_k z_k df/dz_k.
HoloFunction radial_derivative(const HoloFunction& f);

struct FracDerivParams {
  double alpha = -1.0;
  double t = 1.0;
};

enum class FracDirection { raise, lower };

/// Coefficient by which R^{alpha,t} multiplies the homogeneous part of degree k.
double frac_multiplier(std::size_t n, const FracDerivParams& p, int k);

/// R^{alpha,t} (raise) or R_{alpha,t} (lower). Kernel atoms must carry
/// beta = n+1+alpha (raise) or n+1+alpha+t (lower); InputError otherwise.
HoloFunction frac_deriv(const HoloFunction& f, const FracDerivParams& p, FracDirection direction);

struct HardyNorm {
  double value = 0.0;
  double std_error = 0.0;
  /// (r, (integral of |f(r zeta)|^p dsigma)^{1/p}) on the radius ladder, if requested.
  std::vector<std::pair<double, double>> ladder;
  bool divergent = false;
};

/// ||f||_{H^p} from equal-weight sphere nodes. Every atom is based inside
/// the ball, so f extends continuously to the sphere and the supremum over
/// dilations is the boundary value; ladder_depth > 0 additionally reports
/// the dilations r = 1 - 2^{-j}, j <= ladder_depth.
HardyNorm hardy_norm(const HoloFunction& f, double p, std::span<const BoundaryPoint> nodes, int ladder_depth = 0);

struct RegionSpecParams {
  double gamma = kDefaultAperture;
  /// Truncation: only |z| <= 1 - eps is explored.
  double eps = 1e-4;
};

/// sup |f| over a nested grid of Gamma_gamma(zeta) truncated at 1 - eps.
/// Nondecreasing in resolution.
double maximal_fn(const HoloFunction& f, const BoundaryPoint& zeta, const RegionSpecParams& region,
                  std::size_t resolution = 8);

struct AreaParams {
  RegionSpecParams region;
  /// Classical area function (plain R, weight (1-|z|^2)^2 dlambda_n) when
  /// false; R^{s,t} with weight (1-|z|^2)^{2t} dlambda_n when true.
  bool fractional = false;
  double s = -1.0;
  double t = 1.0;
  std::size_t per_layer = 512;
  std::uint64_t seed = 1;
};

/// Area function at zeta with a Monte Carlo error estimate of the squared integral.
Estimate area_fn(const HoloFunction& f, const BoundaryPoint& zeta, const AreaParams& params);

}  // namespace qmu

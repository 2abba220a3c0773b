#pragma once
// Applications on the unit disk: weighted composition operators W_{u,phi},
// Volterra operators J_g, the Nevanlinna counting function, Besov seminorms
// and the Schatten-class criterion integrals attached to them.

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "qmu/holo.hpp"
#include "qmu/measure.hpp"
#include "qmu/sampling.hpp"

namespace qmu {

/// Coefficients a_0, a_1, ... of a polynomial in one variable.
using Polynomial = std::vector<cplx>;

cplx eval_poly(const Polynomial& p, cplx z);

/// Smallest accepted self-map margin 1 - sup |phi| on the circle.
inline constexpr double kMinSelfMapMargin = 0.01;
/// Largest truncation degree for wcomp_matrix.
inline constexpr std::size_t kMaxSection = 256;

/// A polynomial self-map phi of the disk with a weight u.
class DiskMap {
 public:
  /// Certifies sup_{|z|=1} |phi| <= 1 - delta_safe with delta_safe >= 0.01 on
  /// a boundary grid plus a Lipschitz correction; ConstructionError otherwise.
  DiskMap(Polynomial phi, HoloFunction u, std::size_t check_grid = 4096);

  const Polynomial& phi() const { return phi_; }
  const HoloFunction& u() const { return u_; }
  double delta_safe() const { return delta_safe_; }

  nlohmann::json to_json() const;
  static DiskMap from_json(const nlohmann::json& j);

 private:
  Polynomial phi_;
  HoloFunction u_;
  double delta_safe_ = 0.0;
};

/// Atoms phi(e^{2 pi i k/m}) with weights |u(e^{2 pi i k/m})|^2 / m.
AtomicMeasure pullback_measure(const DiskMap& m, std::size_t grid_size);

/// First count Taylor coefficients of a function of one variable.
std::vector<cplx> taylor_coefficients(const HoloFunction& f, std::size_t count);

/// Finite section of W_{u,phi} in the monomial basis: column k holds the first
/// N Taylor coefficients of u phi^k.
Eigen::MatrixXcd wcomp_matrix(const DiskMap& m, std::size_t n);

/// N*_phi(w) = sum over roots of phi(z) = w in the disk of (1-|z|^2), with
/// multiplicity. DomainError at w = phi(0).
double nevanlinna(const Polynomial& phi, cplx w);

struct IntegralReport {
  double value = 0.0;
  double std_error = 0.0;
  double tail_ratio = 0.0;
  bool divergent = false;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

/// integral of ((1-|w|^2) |Rg(w)|)^p dlambda_n
IntegralReport besov_seminorm(const HoloFunction& g, double p, const QuadratureSpec& spec = {});

/// Quadrature atoms for d mu_g = |Rg|^2 dv_1, dv_1 = (n+1)(1-|z|^2) dv.
AtomicMeasure volterra_measure(const HoloFunction& g, std::size_t samples, std::size_t shells = 16,
                               std::uint64_t seed = 1);

struct CriterionSpec {
  QuadratureSpec outer{.samples_per_component = 2048};
  /// Ball samples for the inner integral (Volterra source).
  std::size_t inner_samples = 512;
  std::size_t inner_shells = 8;
  /// Boundary grid for the pullback measure (composition source).
  std::size_t grid_size = 512;
  /// Outer quadrature for the composition source.
  StNormSpec st{.quadrature = {.samples_per_component = 512}, .refinements = 1, .max_anchors = 16};
};

struct VolterraSource {
  HoloFunction g;
};
struct WcompSource {
  DiskMap map;
};
using CriterionSource = std::variant<VolterraSource, WcompSource>;

/// A t > t_{p/2} for which a measure with compact support gives shell
/// contributions decaying at least like 2^{-j}, so tail detection is sharp.
double criterion_default_t(std::size_t n, double p);

/// integral of (S_t mu)^{p/2} dlambda_n for mu = mu_g or mu_{u,phi}.
/// ParameterError unless t > t_{p/2}.
IntegralReport schatten_criterion_integral(const CriterionSource& source, double p, double t,
                                           const CriterionSpec& spec = {});

/// integral of ((1-|w|^2)^{1+t} integral N*_phi(z) |1-z conj(w)|^{-(4+t)} dA(z))^{p/2}
/// dlambda_1(w), the composition criterion written through N*_phi. The inner
/// integral uses spec.inner_samples ball points. ParameterError unless t > t_{p/2}.
IntegralReport nevanlinna_kernel_integral(const Polynomial& phi, double p, double t, const CriterionSpec& spec = {});

/// integral of (N*_phi(w) / (1-|w|))^{p/2} dlambda_1
IntegralReport nevanlinna_criterion_integral(const Polynomial& phi, double p, const QuadratureSpec& spec = {});

}  // namespace qmu

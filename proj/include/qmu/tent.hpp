#pragma once
// Tent spaces of sequences indexed by the centers of a lattice: the mixed
// norms T^p_q and T^p_inf, the duality pairing and the synthesis operator.

#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmu/geometry.hpp"
#include "qmu/holo.hpp"
#include "qmu/lattice.hpp"

namespace qmu {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// lambda_k aligned with Lattice::centers().
struct TentSequence {
  std::vector<cplx> values;

  std::size_t size() const { return values.size(); }
  /// JSON array of [re, im] pairs.
  nlohmann::json to_json() const;
  static TentSequence from_json(const nlohmann::json& j);
};

struct TentNorm {
  double value = 0.0;
  /// Sphere nodes whose approach region holds no center.
  std::size_t empty_nodes = 0;
  std::vector<std::string> warnings;
};

/// (mean over zeta of (sum_{a_k in Gamma(zeta)} |lambda_k|^q)^{p/q})^{1/p};
/// q = kInfinity takes the supremum over a_k in Gamma(zeta) instead.
TentNorm tent_norm(const TentSequence& lambda, const Lattice& z, double p, double q,
                   std::span<const BoundaryPoint> nodes, double gamma = kDefaultAperture);

/// sum_k lambda_k conj(mu_k) (1-|a_k|^2)^n
cplx tent_pairing(const TentSequence& lambda, const TentSequence& mu, const Lattice& z);

/// Smallest admissible synthesis exponent for H^p: n max(1, 2/p).
double synthesis_threshold(std::size_t n, double p);

/// T_Z(lambda) = sum_j lambda_j (1-|a_j|^2)^b (1-<z,a_j>)^{-b}
HoloFunction synthesis(const TentSequence& lambda, const Lattice& z, double b);

}  // namespace qmu

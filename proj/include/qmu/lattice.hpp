#pragma once
// r-lattices in the Bergman metric.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmu/geometry.hpp"
#include "qmu/simd/kernels.hpp"

namespace qmu {

struct LatticeSpec {
  std::size_t dim = 1;
  /// Bergman radius r in (0, 1).
  double r = 0.5;
  /// Candidate spacing is r / candidate_density in the Bergman metric.
  std::size_t candidate_density = 6;
  std::uint64_t seed = 1;
  /// Pseudo-hyperbolic radius of the region the lattice must cover.
  double cover_radius = 0.95;
  /// Validation points for the covering and overlap certificates.
  std::size_t validation_samples = 10000;
  /// When nonempty, the lattice is built only on the Bergman 2r-neighborhood
  /// of these points and the covering is certified on their r-neighborhood;
  /// cover_radius is then ignored.
  std::vector<Point> focus;
};

class Lattice {
 public:
  Lattice(std::size_t dim, double r, std::vector<Point> centers, std::size_t overlap_bound, double cover_radius);

  std::size_t dim() const { return dim_; }
  double radius() const { return r_; }
  const std::vector<Point>& centers() const { return centers_; }
  std::size_t size() const { return centers_.size(); }
  std::size_t overlap_bound() const { return overlap_bound_; }
  /// 0 for lattices built around focus points.
  double cover_radius() const { return cover_radius_; }

  /// Smallest pairwise Bergman distance between centers (infinity if < 2 centers).
  double min_separation() const;
  /// Number of balls D(a_k, radius) containing z.
  std::size_t multiplicity(const Point& z, double radius) const;

  nlohmann::json to_json() const;
  static Lattice from_json(const nlohmann::json& j);

 private:
  std::size_t dim_;
  double r_;
  std::vector<Point> centers_;
  std::size_t overlap_bound_;
  double cover_radius_;
  simd::AtomBlock block_;
};

/// Greedy farthest-point packing over a radial-angular candidate grid.
/// Centers are pairwise at Bergman distance >= r/2 and the balls D(a_k, r)
/// cover |z| <= cover_radius (or the focus neighborhood); both are
/// certified, the covering on seeded validation points. Throws
/// ConstructionError if the candidate grid is too coarse to certify the
/// covering.
Lattice build_lattice(const LatticeSpec& spec);

}  // namespace qmu

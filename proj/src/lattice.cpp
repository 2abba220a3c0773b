#include "qmu/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "qmu/errors.hpp"
#include "qmu/simd/kernels.hpp"

namespace qmu {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Closeness 1 - |phi_a(z)|^2 at Bergman distance beta.
double closeness_at(double beta) {
  const double t = std::tanh(beta);
  return 1.0 - t * t;
}

double beta_of_closeness(double c) {
  return std::atanh(std::sqrt(std::clamp(1.0 - c, 0.0, 1.0)));
}

// lambda_n({|z|^2 < u}) = (u / (1 - u))^n
double invariant_volume(std::size_t n, double u) { return std::pow(u / (1.0 - u), static_cast<double>(n)); }

double radius_from_invariant_volume(std::size_t n, double vol) {
  const double x = std::pow(vol, 1.0 / static_cast<double>(n));
  return std::sqrt(x / (1.0 + x));
}

Coords gaussian_direction(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Coords c(n);
  double r2 = 0.0;
  while (r2 < 1e-300) {
    for (std::size_t k = 0; k < n; ++k) c[k] = cplx(g(rng), g(rng));
    r2 = c.norm_sq();
  }
  return (1.0 / std::sqrt(r2)) * c;
}

// Shells of spacing h around the origin out to Bergman radius beta_max.
std::vector<Coords> candidate_grid(const LatticeSpec& spec, double beta_max, std::mt19937_64& rng) {
  const std::size_t n = spec.dim;
  const double h = spec.r / static_cast<double>(spec.candidate_density);
  const auto levels = static_cast<std::size_t>(std::ceil(beta_max / h));
  std::vector<Coords> out;
  out.emplace_back(n);  // origin
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const double cell = std::pow(std::sinh(h), 2.0 * static_cast<double>(n));
  for (std::size_t i = 1; i <= levels; ++i) {
    const double beta = static_cast<double>(i) * h;
    if (n == 1) {
      const double rho = std::tanh(beta);
      const auto count = static_cast<std::size_t>(std::ceil(std::numbers::pi * std::sinh(2.0 * beta) / h));
      const double offset = (i % 2) ? 0.5 : 0.0;
      for (std::size_t k = 0; k < count; ++k)
        out.push_back(Coords{std::polar(rho, kTwoPi * (static_cast<double>(k) + offset) / static_cast<double>(count))});
    } else {
      const double lo = std::tanh(beta - 0.5 * h), hi = std::tanh(beta + 0.5 * h);
      const double shell = invariant_volume(n, hi * hi) - invariant_volume(n, lo * lo);
      const auto count = static_cast<std::size_t>(std::ceil(2.0 * shell / cell));
      for (std::size_t k = 0; k < count; ++k) {
        const double rho = std::tanh(beta + h * u(rng));
        out.push_back(rho * gaussian_direction(n, rng));
      }
    }
  }
  return out;
}

}  // namespace

Lattice::Lattice(std::size_t dim, double r, std::vector<Point> centers, std::size_t overlap_bound, double cover_radius)
    : dim_(dim), r_(r), centers_(std::move(centers)), overlap_bound_(overlap_bound), cover_radius_(cover_radius) {
  if (!(r > 0.0 && r < 1.0)) throw InputError("lattice radius must lie in (0, 1)");
  for (const auto& c : centers_)
    if (c.dim() != dim_) throw InputError("lattice center dimension mismatch");
  std::vector<double> ones(centers_.size(), 1.0);
  block_ = simd::AtomBlock::build(centers_, ones);
}

double Lattice::min_separation() const {
  if (centers_.size() < 2) return std::numeric_limits<double>::infinity();
  const auto& kern = simd::kernels();
  std::vector<double> d(centers_.size());
  double max_closeness = 0.0;
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    kern.distances_sq(block_, centers_[i].coords().data(), d.data());
    const double fi = 1.0 - centers_[i].norm_sq();
    for (std::size_t j = i + 1; j < centers_.size(); ++j)
      max_closeness = std::max(max_closeness, fi * block_.one_minus_norm_sq[j] / d[j]);
  }
  return beta_of_closeness(max_closeness);
}

std::size_t Lattice::multiplicity(const Point& z, double radius) const {
  if (z.dim() != dim_) throw InputError("lattice multiplicity: dimension mismatch");
  const double threshold = closeness_at(radius);
  std::vector<double> d(centers_.size());
  simd::kernels().distances_sq(block_, z.coords().data(), d.data());
  const double fz = 1.0 - z.norm_sq();
  std::size_t count = 0;
  for (std::size_t k = 0; k < centers_.size(); ++k)
    if (fz * block_.one_minus_norm_sq[k] / d[k] > threshold) ++count;
  return count;
}

nlohmann::json Lattice::to_json() const {
  nlohmann::json centers = nlohmann::json::array();
  for (const auto& c : centers_) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t k = 0; k < dim_; ++k) {
      row.push_back(c[k].real());
      row.push_back(c[k].imag());
    }
    centers.push_back(std::move(row));
  }
  return {{"dim", dim_}, {"r", r_}, {"N", overlap_bound_}, {"cover_radius", cover_radius_}, {"centers", centers}};
}

Lattice Lattice::from_json(const nlohmann::json& j) {
  try {
    const auto dim = j.at("dim").get<std::size_t>();
    if (dim == 0 || dim > kMaxDim) throw InputError("lattice JSON: unsupported dimension");
    std::vector<Point> centers;
    for (const auto& row : j.at("centers")) {
      if (row.size() != 2 * dim) throw InputError("lattice JSON: center has wrong length");
      Coords c(dim);
      for (std::size_t k = 0; k < dim; ++k) c[k] = cplx(row[2 * k].get<double>(), row[2 * k + 1].get<double>());
      centers.emplace_back(c);
    }
    return Lattice(dim, j.at("r").get<double>(), std::move(centers), j.at("N").get<std::size_t>(),
                   j.value("cover_radius", 0.0));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("lattice JSON: ") + e.what());
  }
}

Lattice build_lattice(const LatticeSpec& spec) {
  if (spec.dim == 0 || spec.dim > kMaxDim) throw InputError("build_lattice: unsupported dimension");
  if (!(spec.r > 0.0 && spec.r < 1.0)) throw InputError("build_lattice: r must lie in (0, 1)");
  if (!(spec.cover_radius > 0.0 && spec.cover_radius < 1.0))
    throw InputError("build_lattice: cover_radius must lie in (0, 1)");
  if (spec.candidate_density < 2) throw InputError("build_lattice: candidate_density must be at least 2");

  const bool focused = !spec.focus.empty();
  const double h = spec.r / static_cast<double>(spec.candidate_density);
  std::mt19937_64 rng(spec.seed);
  std::vector<Coords> candidates;
  if (focused) {
    // focus points within r of a kept one add nothing: their r-balls sit in the kept 2r-ball
    std::vector<Point> kept;
    const double near = closeness_at(spec.r);
    for (const auto& f : spec.focus) {
      if (f.dim() != spec.dim) throw InputError("build_lattice: focus point dimension mismatch");
      candidates.push_back(f.coords());
      if (std::none_of(kept.begin(), kept.end(), [&](const Point& k) { return mobius_closeness(f, k) > near; }))
        kept.push_back(f);
    }
    const std::vector<Coords> local = candidate_grid(spec, 2.0 * spec.r, rng);
    for (const auto& f : kept)
      for (const auto& c : local) candidates.push_back(mobius(f, Point(c)).coords());
  } else {
    candidates = candidate_grid(spec, std::atanh(spec.cover_radius) + h, rng);
  }
  std::vector<double> ones(candidates.size(), 1.0);
  const simd::AtomBlock block = simd::AtomBlock::build(candidates, ones);
  const auto& kern = simd::kernels();

  // Farthest-point insertion until every candidate is within 0.75 r of a center.
  const double stop = closeness_at(0.75 * spec.r);
  std::vector<double> closeness(candidates.size(), 0.0);
  std::vector<Point> centers;
  std::size_t next = 0;
  while (true) {
    const Coords& a = candidates[next];
    centers.emplace_back(a);
    next = kern.closeness_update(block, a.data(), a.norm_sq(), closeness.data());
    if (closeness[next] >= stop) break;
  }

  const double cover = focused ? 0.0 : spec.cover_radius;
  Lattice lattice(spec.dim, spec.r, std::move(centers), 0, cover);
  if (lattice.min_separation() < 0.5 * spec.r)
    throw ConstructionError("build_lattice: separation certificate failed");

  // Covering and overlap on points uniform for lambda_n inside the cover
  // radius, or inside D(f, r) around a random focus point.
  const double rmax = focused ? std::tanh(spec.r) : spec.cover_radius;
  const double vol_max = invariant_volume(spec.dim, rmax * rmax);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, focused ? spec.focus.size() - 1 : 0);
  std::size_t overlap = 0;
  for (std::size_t i = 0; i < spec.validation_samples; ++i) {
    const double rho = std::min(radius_from_invariant_volume(spec.dim, u(rng) * vol_max), rmax);
    Point z(rho * gaussian_direction(spec.dim, rng));
    if (focused) z = mobius(spec.focus[pick(rng)], z);
    if (lattice.multiplicity(z, spec.r) == 0)
      throw ConstructionError("build_lattice: candidate grid too coarse, validation point at |z| = " +
                              std::to_string(z.norm()) + " is not covered; raise candidate_density");
    overlap = std::max(overlap, lattice.multiplicity(z, 4.0 * spec.r));
  }
  return Lattice(spec.dim, spec.r, lattice.centers(), overlap, cover);
}

}  // namespace qmu

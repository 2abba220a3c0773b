#include "qmu/measure.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "qmu/errors.hpp"

namespace qmu {

namespace {

double lambda_weight_exponent(std::size_t n) { return -static_cast<double>(n) - 1.0; }

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::vector<double> coords_to_reals(const Coords& c) {
  std::vector<double> out;
  for (std::size_t k = 0; k < c.dim(); ++k) {
    out.push_back(c[k].real());
    out.push_back(c[k].imag());
  }
  return out;
}

}  // namespace

AtomicMeasure::AtomicMeasure(std::size_t dim) : AtomicMeasure(dim, {}, {}) {}

AtomicMeasure::AtomicMeasure(std::size_t dim, std::vector<Point> points, std::vector<double> weights) : dim_(dim) {
  if (dim == 0 || dim > kMaxDim) throw InputError("AtomicMeasure: unsupported dimension");
  if (points.size() != weights.size()) throw InputError("AtomicMeasure: points and weights differ in length");
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (points[j].dim() != dim) throw InputError("AtomicMeasure: atom dimension mismatch");
    if (!(weights[j] > 0.0) || !std::isfinite(weights[j]))
      throw InputError("AtomicMeasure: weights must be positive and finite");
    auto it = std::find_if(points_.begin(), points_.end(), [&](const Point& p) { return p.coords() == points[j].coords(); });
    if (it != points_.end()) {
      weights_[static_cast<std::size_t>(it - points_.begin())] += weights[j];
    } else {
      points_.push_back(points[j]);
      weights_.push_back(weights[j]);
    }
  }
  block_ = simd::AtomBlock::build(points_, weights_);
}

double AtomicMeasure::total_mass() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

double AtomicMeasure::max_radius() const {
  double r = 0.0;
  for (const auto& p : points_) r = std::max(r, p.norm());
  return r;
}

AtomicMeasure AtomicMeasure::scaled(double c) const {
  if (!(c > 0.0)) throw InputError("AtomicMeasure::scaled needs c > 0");
  std::vector<double> w = weights_;
  for (double& x : w) x *= c;
  return AtomicMeasure(dim_, points_, std::move(w));
}

AtomicMeasure AtomicMeasure::truncated(double radius) const {
  std::vector<Point> p;
  std::vector<double> w;
  for (std::size_t j = 0; j < size(); ++j) {
    if (points_[j].norm() <= radius) {
      p.push_back(points_[j]);
      w.push_back(weights_[j]);
    }
  }
  return AtomicMeasure(dim_, std::move(p), std::move(w));
}

AtomicMeasure AtomicMeasure::merged(double tol) const {
  std::vector<Point> p;
  std::vector<double> w;
  for (std::size_t j = 0; j < size(); ++j) {
    bool absorbed = false;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if ((p[i].coords() - points_[j].coords()).norm_sq() < tol * tol) {
        w[i] += weights_[j];
        absorbed = true;
        break;
      }
    }
    if (!absorbed) {
      p.push_back(points_[j]);
      w.push_back(weights_[j]);
    }
  }
  return AtomicMeasure(dim_, std::move(p), std::move(w));
}

nlohmann::json AtomicMeasure::to_json() const {
  nlohmann::json atoms = nlohmann::json::array();
  for (std::size_t j = 0; j < size(); ++j) atoms.push_back({{"z", coords_to_reals(points_[j])}, {"c", weights_[j]}});
  return {{"dim", dim_}, {"atoms", atoms}};
}

AtomicMeasure AtomicMeasure::from_json(const nlohmann::json& j) {
  try {
    const auto dim = j.at("dim").get<std::size_t>();
    if (dim == 0 || dim > kMaxDim) throw InputError("measure JSON: unsupported dimension");
    std::vector<Point> p;
    std::vector<double> w;
    for (const auto& a : j.at("atoms")) {
      const auto z = a.at("z").get<std::vector<double>>();
      if (z.size() != 2 * dim) throw InputError("measure JSON: atom has wrong coordinate count");
      Coords c(dim);
      for (std::size_t k = 0; k < dim; ++k) c[k] = cplx(z[2 * k], z[2 * k + 1]);
      p.emplace_back(c);
      w.push_back(a.at("c").get<double>());
    }
    return AtomicMeasure(dim, std::move(p), std::move(w));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("measure JSON: ") + e.what());
  }
}

AtomicMeasure operator+(const AtomicMeasure& a, const AtomicMeasure& b) {
  if (a.dim() != b.dim()) throw InputError("measure sum: dimension mismatch");
  std::vector<Point> p = a.points();
  std::vector<double> w = a.weights();
  p.insert(p.end(), b.points().begin(), b.points().end());
  w.insert(w.end(), b.weights().begin(), b.weights().end());
  return AtomicMeasure(a.dim(), std::move(p), std::move(w));
}

double measure_of_region(const AtomicMeasure& mu, const RegionSpec& region) {
  validate_region(region);
  double m = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j)
    if (region_contains(region, mu.points()[j])) m += mu.weights()[j];
  return m;
}

std::vector<BoundaryPoint> boundary_grid(std::size_t n, std::size_t m, std::uint64_t seed) {
  return sample_sphere(n, m, seed);
}

// ---------------------------------------------------------------- Carleson

nlohmann::json CarlesonReport::to_json() const {
  return {{"s", s},
          {"method", method == CarlesonMethod::box ? "box" : "kernel"},
          {"t", t},
          {"value", value},
          {"argmax", argmax},
          {"argmax_scale", argmax_scale},
          {"grid_spec", grid_spec},
          {"refinement_trace", refinement_trace}};
}

std::string CarlesonReport::csv_header() { return "method,s,t,value,argmax_scale,grid_spec,refinement_trace"; }

std::string CarlesonReport::csv_row() const {
  std::string trace;
  for (std::size_t i = 0; i < refinement_trace.size(); ++i) trace += (i ? ";" : "") + fmt(refinement_trace[i]);
  return std::string(method == CarlesonMethod::box ? "box" : "kernel") + "," + fmt(s) + "," + fmt(t) + "," +
         fmt(value) + "," + fmt(argmax_scale) + "," + grid_spec + "," + trace;
}

namespace {

struct BoxSup {
  double value = 0.0;
  double delta = 0.0;
};

// Exact sup over delta in (0, 2] of mu(B_delta(zeta)) / delta^{ns} given the
// squared distances |1 - <z_j, zeta>|^2.
BoxSup box_sup(std::vector<std::pair<double, double>>& dist_mass, double ns) {
  std::sort(dist_mass.begin(), dist_mass.end());
  BoxSup best;
  double mass = 0.0;
  for (std::size_t i = 0; i < dist_mass.size(); ++i) {
    mass += dist_mass[i].second;
    // all atoms tied at this distance enter together just above it
    if (i + 1 < dist_mass.size() && dist_mass[i + 1].first == dist_mass[i].first) continue;
    const double d = std::sqrt(dist_mass[i].first);
    if (d >= 2.0) break;
    const double v = mass / std::pow(d, ns);
    if (v > best.value) best = {v, d};
  }
  return best;
}

std::vector<BoundaryPoint> atom_directions(const AtomicMeasure& mu) {
  std::vector<BoundaryPoint> out;
  for (const auto& p : mu.points())
    if (p.norm_sq() > 0.0) out.push_back(BoundaryPoint::normalized(p.coords()));
  return out;
}

}  // namespace

CarlesonReport carleson_box(const AtomicMeasure& mu, double s, const CarlesonGrid& grid) {
  if (!(s > 0.0)) throw InputError("carleson_box needs s > 0");
  if (grid.directions == 0) throw InputError("carleson grid needs directions >= 1");
  const std::size_t n = mu.dim();
  const double ns = static_cast<double>(n) * s;
  CarlesonReport rep;
  rep.s = s;
  rep.method = CarlesonMethod::box;
  rep.grid_spec = "directions=" + std::to_string(grid.directions) + "x2^" + std::to_string(grid.refinements) +
                  "+atoms;delta=exact";
  if (mu.empty()) {
    rep.refinement_trace.assign(grid.refinements + 1, 0.0);
    return rep;
  }
  const auto& kern = simd::kernels();
  std::vector<double> d2(mu.size());
  std::vector<std::pair<double, double>> dm(mu.size());
  double best = 0.0;
  auto visit = [&](const BoundaryPoint& zeta) {
    kern.distances_sq(mu.block(), zeta.coords().data(), d2.data());
    for (std::size_t j = 0; j < mu.size(); ++j) dm[j] = {d2[j], mu.weights()[j]};
    const BoxSup b = box_sup(dm, ns);
    if (b.value > best) {
      best = b.value;
      rep.argmax.clear();
      for (std::size_t k = 0; k < n; ++k) {
        rep.argmax.push_back(zeta[k].real());
        rep.argmax.push_back(zeta[k].imag());
      }
      rep.argmax_scale = b.delta;
    }
  };
  for (const auto& zeta : atom_directions(mu)) visit(zeta);
  std::size_t done = 0;
  for (std::size_t level = 0; level <= grid.refinements; ++level) {
    const std::size_t m = grid.directions << level;
    const auto zetas = boundary_grid(n, m, grid.seed);
    // nested grids: only visit the new nodes (n = 1: odd indices after the first level)
    for (std::size_t i = 0; i < zetas.size(); ++i) {
      if (level > 0 && (n == 1 ? i % 2 == 0 : i < done)) continue;
      visit(zetas[i]);
    }
    done = m;
    rep.refinement_trace.push_back(best);
  }
  rep.value = best;
  return rep;
}

CarlesonReport carleson_kernel(const AtomicMeasure& mu, double s, double t, const CarlesonGrid& grid) {
  if (!(s > 0.0)) throw InputError("carleson_kernel needs s > 0");
  if (!(t > 0.0)) throw InputError("carleson_kernel needs t > 0");
  if (grid.directions == 0) throw InputError("carleson grid needs directions >= 1");
  const std::size_t n = mu.dim();
  const double e = static_cast<double>(n) * s + t;
  CarlesonReport rep;
  rep.s = s;
  rep.t = t;
  rep.method = CarlesonMethod::kernel;
  const double rmax = mu.max_radius();
  const auto depth = static_cast<std::size_t>(std::ceil(std::log2(1.0 / std::max(1.0 - rmax, 1e-15)))) + grid.extra_depth;
  rep.grid_spec = "atoms+origin+radii(1-2^-j,j<=" + std::to_string(depth) + ")xdirections=" +
                  std::to_string(grid.directions) + "x2^" + std::to_string(grid.refinements);
  if (mu.empty()) {
    rep.refinement_trace.assign(grid.refinements + 1, 0.0);
    return rep;
  }
  const auto& kern = simd::kernels();
  double best = 0.0;
  auto visit = [&](const Coords& a) {
    const double fa = 1.0 - a.norm_sq();
    const double v = std::pow(fa, t) * kern.kernel_power_sum(mu.block(), a.data(), e);
    if (v > best) {
      best = v;
      rep.argmax = coords_to_reals(a);
      rep.argmax_scale = 1.0 - std::sqrt(a.norm_sq());
    }
  };
  visit(Coords(n));
  for (const auto& p : mu.points()) visit(p.coords());
  std::size_t done = 0;
  for (std::size_t level = 0; level <= grid.refinements; ++level) {
    const std::size_t m = grid.directions << level;
    const auto zetas = boundary_grid(n, m, grid.seed);
    for (std::size_t i = 0; i < zetas.size(); ++i) {
      if (level > 0 && (n == 1 ? i % 2 == 0 : i < done)) continue;
      for (std::size_t j = 1; j <= depth; ++j) visit((1.0 - std::ldexp(1.0, -static_cast<int>(j))) * zetas[i].coords());
    }
    done = m;
    rep.refinement_trace.push_back(best);
  }
  rep.value = best;
  return rep;
}

CarlesonReport carleson_constant(const AtomicMeasure& mu, double s, CarlesonMethod method, double t,
                                 const CarlesonGrid& grid) {
  return method == CarlesonMethod::box ? carleson_box(mu, s, grid) : carleson_kernel(mu, s, t, grid);
}

std::vector<ProfilePoint> vanishing_profile(const AtomicMeasure& mu, double s, std::span<const double> deltas,
                                            std::span<const BoundaryPoint> zetas) {
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0 && deltas[i] <= 2.0)) throw InputError("vanishing_profile: delta outside (0, 2]");
    if (i > 0 && !(deltas[i] < deltas[i - 1])) throw InputError("vanishing_profile: delta grid must be decreasing");
  }
  const double ns = static_cast<double>(mu.dim()) * s;
  std::vector<ProfilePoint> out;
  for (double d : deltas) out.push_back({d, 0.0});
  if (mu.empty()) return out;
  const auto& kern = simd::kernels();
  std::vector<double> d2(mu.size());
  std::vector<std::pair<double, double>> dm(mu.size());
  std::vector<double> cum(mu.size());
  for (const auto& zeta : zetas) {
    if (zeta.dim() != mu.dim()) throw InputError("vanishing_profile: dimension mismatch");
    kern.distances_sq(mu.block(), zeta.coords().data(), d2.data());
    for (std::size_t j = 0; j < mu.size(); ++j) dm[j] = {d2[j], mu.weights()[j]};
    std::sort(dm.begin(), dm.end());
    double acc = 0.0;
    for (std::size_t j = 0; j < dm.size(); ++j) cum[j] = acc += dm[j].second;
    for (auto& pt : out) {
      // atoms with |1 - <z,zeta>| < delta, strict
      const double d2max = pt.delta * pt.delta;
      const auto it = std::lower_bound(dm.begin(), dm.end(), std::make_pair(d2max, -std::numeric_limits<double>::infinity()));
      const auto k = static_cast<std::size_t>(it - dm.begin());
      if (k > 0) pt.value = std::max(pt.value, cum[k - 1] / std::pow(pt.delta, ns));
    }
  }
  return out;
}

bool vanishing_flag(std::span<const ProfilePoint> profile, double drop) {
  double top = 0.0;
  for (const auto& p : profile) top = std::max(top, p.value);
  if (top == 0.0) return true;
  const std::size_t start = profile.size() - std::max<std::size_t>(1, profile.size() / 3);
  double tail = 0.0;
  for (std::size_t i = start; i < profile.size(); ++i) tail = std::max(tail, profile[i].value);
  return tail <= drop * top;
}

std::vector<double> delta_ladder(std::size_t levels) {
  std::vector<double> d;
  for (std::size_t j = 0; j < levels; ++j) d.push_back(std::ldexp(2.0, -static_cast<int>(j)));
  return d;
}

// ---------------------------------------------------------------- mu~

namespace {

struct TildeInputs {
  std::vector<double> values;
  std::vector<double> thresholds_sq;
};

TildeInputs tilde_inputs(const AtomicMeasure& mu, double gamma) {
  if (!(gamma > 1.0)) throw InputError("approach region needs gamma > 1");
  TildeInputs in;
  const double n = static_cast<double>(mu.dim());
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const double depth = 1.0 - mu.points()[j].norm_sq();
    in.values.push_back(mu.weights()[j] * std::pow(depth, -n));
    const double th = 0.5 * gamma * depth;
    in.thresholds_sq.push_back(th * th);
  }
  return in;
}

}  // namespace

double tilde_mu(const AtomicMeasure& mu, const BoundaryPoint& zeta, double gamma) {
  if (zeta.dim() != mu.dim()) throw InputError("tilde_mu: dimension mismatch");
  const TildeInputs in = tilde_inputs(mu, gamma);
  if (mu.empty()) return 0.0;
  return simd::kernels().masked_sum(mu.block(), zeta.coords().data(), in.values.data(), in.thresholds_sq.data());
}

Estimate tilde_mu_lr_norm(const AtomicMeasure& mu, double r, std::span<const BoundaryPoint> nodes, double gamma) {
  if (!(r >= 1.0)) throw InputError("tilde_mu_lr_norm needs r >= 1");
  if (nodes.empty()) throw InputError("tilde_mu_lr_norm needs sphere nodes");
  const TildeInputs in = tilde_inputs(mu, gamma);
  if (mu.empty()) return {};
  const auto& kern = simd::kernels();
  double s = 0.0, s2 = 0.0;
  for (const auto& zeta : nodes) {
    const double v = std::pow(kern.masked_sum(mu.block(), zeta.coords().data(), in.values.data(), in.thresholds_sq.data()), r);
    s += v;
    s2 += v * v;
  }
  const double m = static_cast<double>(nodes.size());
  const double mean = s / m;
  const double se_mean = nodes.size() > 1 ? std::sqrt(std::max(0.0, (s2 / m - mean * mean) / (m - 1.0))) : 0.0;
  const double norm = std::pow(mean, 1.0 / r);
  return {norm, mean > 0.0 ? se_mean * norm / (r * mean) : 0.0};
}

// ---------------------------------------------------------------- S_t mu

double t_threshold(std::size_t n, double p) {
  if (!(p > 0.0)) throw InputError("exponent p must be positive");
  const double nd = static_cast<double>(n);
  return std::max(nd / p - nd, 0.0);
}

double berezin_st(const AtomicMeasure& mu, double t, const Point& w) {
  if (!(t > 0.0)) throw InputError("berezin_st needs t > 0");
  if (w.dim() != mu.dim()) throw InputError("berezin_st: dimension mismatch");
  if (mu.empty()) return 0.0;
  const double n = static_cast<double>(mu.dim());
  return std::pow(1.0 - w.norm_sq(), n + t) * simd::kernels().kernel_power_sum(mu.block(), w.coords().data(), 2.0 * n + t);
}

StNorm st_lambda_norm(const AtomicMeasure& mu, double t, double p, const StNormSpec& spec) {
  const std::size_t n = mu.dim();
  const double tp = t_threshold(n, p);
  if (!(t > tp))
    throw ParameterError("st_lambda_norm requires t > t_p = max(n/p - n, 0) = " + fmt(tp) + ", got t = " + fmt(t));
  StNorm out;
  if (mu.empty()) {
    out.refinement_trace.assign(spec.refinements + 1, 0.0);
    return out;
  }
  // anchors: the atoms carrying the largest diagonal weight c_j (1-|z_j|^2)^{-n}
  std::vector<std::size_t> order(mu.size());
  std::iota(order.begin(), order.end(), 0);
  auto diag = [&](std::size_t j) { return mu.weights()[j] * std::pow(1.0 - mu.points()[j].norm_sq(), -double(n)); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return diag(a) > diag(b); });
  std::vector<Point> anchors;
  for (std::size_t i = 0; i < std::min(spec.max_anchors, order.size()); ++i) anchors.push_back(mu.points()[order[i]]);

  const double e = lambda_weight_exponent(n);
  auto f = [&](const Point& w) { return std::pow(berezin_st(mu, t, w), p) * std::pow(1.0 - w.norm_sq(), e); };
  QuadratureSpec q = spec.quadrature;
  BallIntegral last;
  for (std::size_t level = 0; level <= spec.refinements; ++level) {
    last = integrate_ball(n, f, anchors, q);
    out.refinement_trace.push_back(last.value);
    q.samples_per_component *= 2;
    q.seed += 1;
  }
  out.pth_power = last.value;
  out.value = std::pow(last.value, 1.0 / p);
  out.std_error = last.value > 0.0 ? last.std_error * out.value / (p * last.value) : 0.0;
  out.decaying = last.decaying;
  out.tail_ratio = last.tail_ratio;
  if (!last.decaying)
    out.warnings.push_back("shell contributions do not decay (tail ratio " + fmt(last.tail_ratio) +
                           "); the integral may diverge");
  return out;
}

double lattice_sum(const AtomicMeasure& mu, const Lattice& lattice, double p) {
  if (!(p > 0.0)) throw InputError("lattice_sum needs p > 0");
  if (lattice.dim() != mu.dim()) throw InputError("lattice_sum: dimension mismatch");
  if (mu.empty()) return 0.0;
  for (const auto& z : mu.points())
    if (lattice.multiplicity(z, lattice.radius()) == 0)
      throw InputError("lattice_sum: the lattice does not cover the atom at |z| = " + fmt(z.norm()));
  const double n = static_cast<double>(mu.dim());
  const double tr = std::tanh(lattice.radius());
  const double ball_closeness = 1.0 - tr * tr;
  const auto& kern = simd::kernels();
  std::vector<double> thr(mu.size());
  double sum = 0.0;
  for (const auto& a : lattice.centers()) {
    // beta(a, z_j) < r  <=>  |1-<z_j,a>|^2 < (1-|a|^2)(1-|z_j|^2) / (1 - tanh^2 r)
    const double fa = 1.0 - a.norm_sq();
    for (std::size_t j = 0; j < mu.size(); ++j) thr[j] = fa * mu.block().one_minus_norm_sq[j] / ball_closeness;
    const double m = kern.masked_sum(mu.block(), a.coords().data(), mu.weights().data(), thr.data());
    if (m > 0.0) sum += std::pow(m / std::pow(fa, n), p);
  }
  return sum;
}

double i_set_measure(const Point& z, double gamma, std::span<const BoundaryPoint> nodes) {
  if (nodes.empty()) throw InputError("i_set_measure needs sphere nodes");
  std::size_t hits = 0;
  for (const auto& zeta : nodes)
    if (region_contains(ApproachRegion{gamma, zeta}, z)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

Estimate forelli_rudin_continuous(const Point& z, double t, double s, const QuadratureSpec& spec) {
  if (!(t > -1.0) || !(s > 0.0)) throw InputError("forelli_rudin_continuous needs t > -1 and s > 0");
  const double n = static_cast<double>(z.dim());
  const double e = n + 1.0 + t + s;
  auto f = [&](const Point& w) {
    return std::pow(1.0 - w.norm_sq(), t) * std::pow(std::norm(1.0 - herm_inner(z, w)), -0.5 * e);
  };
  const Point anchors[] = {z};
  const BallIntegral r = integrate_ball(z.dim(), f, anchors, spec);
  const double scale = std::pow(1.0 - z.norm_sq(), s);
  return {r.value * scale, r.std_error * scale};
}

double forelli_rudin_discrete(const Point& z, std::span<const Point> centers, double t, double s) {
  const double fz = 1.0 - z.norm_sq();
  double sum = 0.0;
  for (const auto& a : centers)
    sum += std::pow(1.0 - a.norm_sq(), t) * std::pow(std::abs(1.0 - herm_inner(z, a)), -s);
  return sum * std::pow(fz, s - t);
}

}  // namespace qmu

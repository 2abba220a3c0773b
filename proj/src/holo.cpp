#include "qmu/holo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "qmu/errors.hpp"

namespace qmu {

namespace {

constexpr double kPruneBelow = 1e-15;
constexpr double kBetaTolerance = 1e-12;

bool same_point(const Point& a, const Point& b) { return a.coords() == b.coords(); }

int total_degree(const MultiIndex& alpha) { return std::accumulate(alpha.begin(), alpha.end(), 0); }

// u^{-beta} on the principal branch; integer exponents avoid exp/log.
cplx inverse_power(cplx u, double beta) {
  const double rounded = std::round(beta);
  if (rounded == beta && rounded >= 1.0 && rounded <= 64.0) {
    const cplx inv = 1.0 / u;
    cplx r = inv;
    for (int k = 1; k < static_cast<int>(rounded); ++k) r *= inv;
    return r;
  }
  return std::exp(-beta * std::log(u));
}

Point parse_point(const nlohmann::json& arr, std::size_t dim) {
  if (!arr.is_array() || arr.size() != 2 * dim) throw InputError("expected " + std::to_string(2 * dim) + " reals");
  Coords c(dim);
  for (std::size_t k = 0; k < dim; ++k) c[k] = cplx(arr[2 * k].get<double>(), arr[2 * k + 1].get<double>());
  return Point(c);
}

}  // namespace

HoloFunction::HoloFunction(std::size_t dim) : dim_(dim) {
  if (dim == 0 || dim > kMaxDim) throw InputError("HoloFunction: unsupported dimension");
}

HoloFunction HoloFunction::constant(std::size_t dim, cplx value) {
  HoloFunction f(dim);
  f.add_monomial(MultiIndex{}, value);
  return f;
}

HoloFunction HoloFunction::monomial(std::size_t dim, const MultiIndex& alpha, cplx c) {
  HoloFunction f(dim);
  f.add_monomial(alpha, c);
  return f;
}

HoloFunction HoloFunction::kernel(const Point& a, double beta, cplx c) {
  HoloFunction f(a.dim());
  f.add_atom(c, a, beta);
  return f;
}

int HoloFunction::degree() const {
  int d = -1;
  for (const auto& [alpha, c] : poly_) d = std::max(d, total_degree(alpha));
  return d;
}

void HoloFunction::add_monomial(const MultiIndex& alpha, cplx c) {
  for (std::size_t k = 0; k < kMaxDim; ++k) {
    if (alpha[k] < 0) throw InputError("negative exponent in monomial");
    if (k >= dim_ && alpha[k] != 0) throw InputError("monomial uses a variable beyond the dimension");
    if (alpha[k] > kMaxDegree) throw InputError("monomial degree exceeds the per-variable cap of 64");
  }
  cplx& slot = poly_[alpha];
  slot += c;
  if (std::abs(slot) < kPruneBelow) poly_.erase(alpha);
}

void HoloFunction::add_atom(cplx c, const Point& a, double beta) {
  if (a.dim() != dim_) throw InputError("kernel atom dimension mismatch");
  if (!(beta > 0.0)) throw InputError("kernel atom exponent must be positive");
  if (a.norm_sq() == 0.0) {
    add_monomial(MultiIndex{}, c);
    return;
  }
  for (auto& atom : atoms_) {
    if (atom.beta == beta && same_point(atom.a, a)) {
      atom.c += c;
      prune();
      return;
    }
  }
  if (std::abs(c) >= kPruneBelow) atoms_.push_back({c, a, beta});
}

void HoloFunction::prune() {
  std::erase_if(atoms_, [](const KernelAtom& k) { return std::abs(k.c) < kPruneBelow; });
}

HoloFunction& HoloFunction::operator+=(const HoloFunction& g) {
  if (g.dim_ != dim_) throw InputError("HoloFunction sum: dimension mismatch");
  for (const auto& [alpha, c] : g.poly_) add_monomial(alpha, c);
  for (const auto& k : g.atoms_) add_atom(k.c, k.a, k.beta);
  return *this;
}

HoloFunction& HoloFunction::operator*=(cplx s) {
  for (auto& [alpha, c] : poly_) c *= s;
  for (auto& k : atoms_) k.c *= s;
  std::erase_if(poly_, [](const auto& kv) { return std::abs(kv.second) < kPruneBelow; });
  prune();
  return *this;
}

HoloFunction operator+(HoloFunction f, const HoloFunction& g) { return f += g; }
HoloFunction operator*(cplx s, HoloFunction f) { return f *= s; }

cplx HoloFunction::operator()(const Coords& z) const {
  if (z.dim() != dim_) throw InputError("HoloFunction evaluation: dimension mismatch");
  if (z.norm_sq() > 1.0 + 1e-12) throw InputError("HoloFunction evaluation outside the closed ball");
  cplx sum = 0.0;
  if (!poly_.empty()) {
    // powers z_k^j for j up to the largest exponent present
    std::array<std::vector<cplx>, kMaxDim> pw;
    for (std::size_t k = 0; k < dim_; ++k) {
      int top = 0;
      for (const auto& [alpha, c] : poly_) top = std::max(top, alpha[k]);
      pw[k].resize(top + 1);
      pw[k][0] = 1.0;
      for (int j = 1; j <= top; ++j) pw[k][j] = pw[k][j - 1] * z[k];
    }
    for (const auto& [alpha, c] : poly_) {
      cplx term = c;
      for (std::size_t k = 0; k < dim_; ++k) term *= pw[k][alpha[k]];
      sum += term;
    }
  }
  for (const auto& k : atoms_) {
    const cplx u = 1.0 - herm_inner(z, k.a);
    if (u == 0.0) throw DomainError("HoloFunction evaluated at a kernel pole");
    sum += k.c * inverse_power(u, k.beta);
  }
  return sum;
}

nlohmann::json HoloFunction::to_json() const {
  nlohmann::json poly = nlohmann::json::array();
  for (const auto& [alpha, c] : poly_) {
    poly.push_back({{"alpha", std::vector<int>(alpha.begin(), alpha.begin() + dim_)}, {"re", c.real()}, {"im", c.imag()}});
  }
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& k : atoms_) {
    std::vector<double> a;
    for (std::size_t i = 0; i < dim_; ++i) {
      a.push_back(k.a[i].real());
      a.push_back(k.a[i].imag());
    }
    atoms.push_back({{"re", k.c.real()}, {"im", k.c.imag()}, {"a", a}, {"beta", k.beta}});
  }
  return {{"dim", dim_}, {"poly", poly}, {"atoms", atoms}};
}

HoloFunction HoloFunction::from_json(const nlohmann::json& j) {
  try {
    std::size_t dim = 0;
    if (j.contains("dim")) {
      dim = j.at("dim").get<std::size_t>();
    } else if (j.contains("poly") && !j.at("poly").empty()) {
      dim = j.at("poly")[0].at("alpha").size();
    } else if (j.contains("atoms") && !j.at("atoms").empty()) {
      dim = j.at("atoms")[0].at("a").size() / 2;
    }
    HoloFunction f(dim);
    for (const auto& m : j.value("poly", nlohmann::json::array())) {
      const auto v = m.at("alpha").get<std::vector<int>>();
      if (v.size() != dim) throw InputError("HoloFunction JSON: multi-index length differs from dim");
      MultiIndex alpha{};
      std::copy(v.begin(), v.end(), alpha.begin());
      f.add_monomial(alpha, cplx(m.at("re").get<double>(), m.value("im", 0.0)));
    }
    for (const auto& a : j.value("atoms", nlohmann::json::array()))
      f.add_atom(cplx(a.at("re").get<double>(), a.value("im", 0.0)), parse_point(a.at("a"), dim),
                 a.at("beta").get<double>());
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("HoloFunction JSON: ") + e.what());
  }
}

HoloFunction radial_derivative(const HoloFunction& f) {
  HoloFunction g(f.dim());
  for (const auto& [alpha, c] : f.poly()) {
    const int k = total_degree(alpha);
    if (k > 0) g.add_monomial(alpha, static_cast<double>(k) * c);
  }
  // R (1-<z,a>)^{-b} = b <z,a> (1-<z,a>)^{-b-1} = b (1-<z,a>)^{-b-1} - b (1-<z,a>)^{-b}
  for (const auto& k : f.atoms()) {
    g.add_atom(k.c * k.beta, k.a, k.beta + 1.0);
    g.add_atom(-k.c * k.beta, k.a, k.beta);
  }
  return g;
}

double frac_multiplier(std::size_t n, const FracDerivParams& p, int k) {
  if (!(p.alpha >= -1.0) || !(p.t >= 0.0)) throw InputError("fractional derivative needs alpha >= -1 and t >= 0");
  if (k < 0) throw InputError("negative degree");
  const double b = static_cast<double>(n) + 1.0 + p.alpha;
  const double kd = static_cast<double>(k);
  return std::exp(std::lgamma(b) + std::lgamma(b + kd + p.t) - std::lgamma(b + p.t) - std::lgamma(b + kd));
}

HoloFunction frac_deriv(const HoloFunction& f, const FracDerivParams& p, FracDirection direction) {
  const std::size_t n = f.dim();
  const bool raise = direction == FracDirection::raise;
  const double base = static_cast<double>(n) + 1.0 + p.alpha;
  const double expected = raise ? base : base + p.t;
  HoloFunction g(n);
  for (const auto& [alpha, c] : f.poly()) {
    const double m = frac_multiplier(n, p, total_degree(alpha));
    g.add_monomial(alpha, raise ? c * m : c / m);
  }
  for (const auto& k : f.atoms()) {
    if (std::abs(k.beta - expected) > kBetaTolerance)
      throw InputError("frac_deriv: kernel exponent " + std::to_string(k.beta) + " is incompatible, expected " +
                       std::to_string(expected));
    g.add_atom(k.c, k.a, raise ? base + p.t : base);
  }
  return g;
}

HardyNorm hardy_norm(const HoloFunction& f, double p, std::span<const BoundaryPoint> nodes, int ladder_depth) {
  if (!(p > 0.0)) throw InputError("hardy_norm needs p > 0");
  if (nodes.empty()) throw InputError("hardy_norm needs sphere nodes");
  const double m = static_cast<double>(nodes.size());
  auto mean_power = [&](double r, double* se) {
    double s = 0.0, s2 = 0.0;
    for (const auto& zeta : nodes) {
      const double v = std::pow(std::abs(f(r * zeta.coords())), p);
      s += v;
      s2 += v * v;
    }
    const double mean = s / m;
    if (se) *se = nodes.size() > 1 ? std::sqrt(std::max(0.0, (s2 / m - mean * mean) / (m - 1.0))) : 0.0;
    return mean;
  };
  HardyNorm out;
  double se = 0.0;
  const double mean = mean_power(1.0, &se);
  if (!std::isfinite(mean)) {
    out.divergent = true;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  out.value = std::pow(mean, 1.0 / p);
  // delta method for the p-th root
  out.std_error = mean > 0.0 ? se * out.value / (p * mean) : 0.0;
  for (int j = 1; j <= ladder_depth; ++j) {
    const double r = 1.0 - std::ldexp(1.0, -j);
    out.ladder.emplace_back(r, std::pow(mean_power(r, nullptr), 1.0 / p));
  }
  if (ladder_depth > 0) out.ladder.emplace_back(1.0, out.value);
  return out;
}

double maximal_fn(const HoloFunction& f, const BoundaryPoint& zeta, const RegionSpecParams& region,
                  std::size_t resolution) {
  if (zeta.dim() != f.dim()) throw InputError("maximal_fn: dimension mismatch");
  double sup = 0.0;
  for (const auto& z : approach_region_grid(zeta, region.gamma, region.eps, resolution))
    sup = std::max(sup, std::abs(f(z)));
  return sup;
}

Estimate area_fn(const HoloFunction& f, const BoundaryPoint& zeta, const AreaParams& params) {
  if (zeta.dim() != f.dim()) throw InputError("area_fn: dimension mismatch");
  const std::size_t n = f.dim();
  if (params.fractional && !(params.s >= -1.0 && params.t > 0.0))
    throw InputError("area_fn needs s >= -1 and t > 0");
  const HoloFunction d =
      params.fractional ? frac_deriv(f, {params.s, params.t}, FracDirection::raise) : radial_derivative(f);
  const double t = params.fractional ? params.t : 1.0;
  // |Df|^2 (1-|z|^2)^{2t} dlambda_n = |Df|^2 (1-|z|^2)^{2t-n-1} dv
  const double e = 2.0 * t - static_cast<double>(n) - 1.0;
  const auto samples = sample_approach_region(zeta, params.region.gamma, params.region.eps, params.per_layer, params.seed);
  double sum = 0.0, var = 0.0;
  // Accepted samples inside one depth layer share the layer's weight; the
  // estimator is a sum of independent per-layer means.
  std::map<std::size_t, std::pair<double, double>> layer;  // sum, sum of squares
  for (const auto& s : samples) {
    const double v = s.weight * std::norm(d(s.point)) * std::pow(1.0 - s.point.norm_sq(), e);
    sum += v;
    auto& [a, b] = layer[s.shell];
    a += v;
    b += v * v;
  }
  const double proposals = static_cast<double>(params.per_layer);
  for (const auto& [j, ab] : layer) {
    const double mean = ab.first / proposals;
    var += proposals * std::max(0.0, ab.second / proposals - mean * mean);
  }
  return {std::sqrt(sum), sum > 0.0 ? std::sqrt(var) / (2.0 * std::sqrt(sum)) : 0.0};
}

}  // namespace qmu

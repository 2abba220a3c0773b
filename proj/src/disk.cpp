#include "qmu/disk.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qmu/errors.hpp"

namespace qmu {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

Polynomial trimmed(Polynomial p) {
  while (!p.empty() && p.back() == 0.0) p.pop_back();
  return p;
}

nlohmann::json complex_array(const std::vector<cplx>& v) {
  nlohmann::json j = nlohmann::json::array();
  for (const cplx& c : v) j.push_back({c.real(), c.imag()});
  return j;
}

// product truncated to `count` coefficients
std::vector<cplx> truncated_product(const std::vector<cplx>& a, const Polynomial& b, std::size_t count) {
  std::vector<cplx> out(count, 0.0);
  for (std::size_t i = 0; i < std::min(a.size(), count); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size() && i + j < count; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

cplx circle_point(std::size_t k, std::size_t m) {
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m));
}

void finish_tail(IntegralReport& r, const BallIntegral& b) {
  r.value = b.value;
  r.std_error = b.std_error;
  r.tail_ratio = b.tail_ratio;
  r.divergent = !b.decaying;
  if (r.divergent)
    r.warnings.push_back("shell contributions do not decay (tail ratio " + fmt(b.tail_ratio) +
                         "); the integral diverges or is not resolved");
}

}  // namespace

cplx eval_poly(const Polynomial& p, cplx z) {
  cplx s = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) s = s * z + *it;
  return s;
}

DiskMap::DiskMap(Polynomial phi, HoloFunction u, std::size_t check_grid) : phi_(trimmed(std::move(phi))), u_(std::move(u)) {
  if (u_.dim() != 1) throw InputError("DiskMap: the weight must be a function of one variable");
  if (check_grid < 16) throw InputError("DiskMap: check grid needs at least 16 points");
  double grid_max = 0.0;
  for (std::size_t k = 0; k < check_grid; ++k) grid_max = std::max(grid_max, std::abs(eval_poly(phi_, circle_point(k, check_grid))));
  // |phi'| <= sum k |a_k| on the circle; nodes are pi/m apart in arc length at worst
  double lip = 0.0;
  for (std::size_t k = 1; k < phi_.size(); ++k) lip += static_cast<double>(k) * std::abs(phi_[k]);
  const double bound = grid_max + lip * std::numbers::pi / static_cast<double>(check_grid);
  delta_safe_ = 1.0 - bound;
  if (delta_safe_ < kMinSelfMapMargin)
    throw ConstructionError("DiskMap: self-map margin " + fmt(delta_safe_) + " is below " + fmt(kMinSelfMapMargin) +
                            " (sup |phi| on the circle is at most " + fmt(bound) + ")");
}

nlohmann::json DiskMap::to_json() const { return {{"phi", complex_array(phi_)}, {"u", u_.to_json()}, {"delta_safe", delta_safe_}}; }

DiskMap DiskMap::from_json(const nlohmann::json& j) {
  try {
    Polynomial phi;
    for (const auto& c : j.at("phi")) {
      if (c.is_number()) {
        phi.emplace_back(c.get<double>(), 0.0);
      } else {
        phi.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
      }
    }
    HoloFunction u = j.contains("u") ? HoloFunction::from_json(j.at("u")) : HoloFunction::constant(1, 1.0);
    return DiskMap(std::move(phi), std::move(u));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("DiskMap JSON: ") + e.what());
  }
}

AtomicMeasure pullback_measure(const DiskMap& m, std::size_t grid_size) {
  if (grid_size < 16) throw InputError("pullback_measure needs at least 16 grid points");
  std::vector<Point> pts;
  std::vector<double> wts;
  const double inv = 1.0 / static_cast<double>(grid_size);
  for (std::size_t k = 0; k < grid_size; ++k) {
    const cplx zeta = circle_point(k, grid_size);
    const double w = std::norm(m.u()(Coords{zeta})) * inv;
    if (w == 0.0) continue;
    pts.push_back(Point{eval_poly(m.phi(), zeta)});
    wts.push_back(w);
  }
  return AtomicMeasure(1, std::move(pts), std::move(wts));
}

std::vector<cplx> taylor_coefficients(const HoloFunction& f, std::size_t count) {
  if (f.dim() != 1) throw InputError("taylor_coefficients: one variable only");
  std::vector<cplx> out(count, 0.0);
  for (const auto& [alpha, c] : f.poly())
    if (static_cast<std::size_t>(alpha[0]) < count) out[alpha[0]] += c;
  // c (1 - z conj a)^{-beta} = c sum_k (beta)_k / k! conj(a)^k z^k
  for (const auto& atom : f.atoms()) {
    const cplx ab = std::conj(atom.a[0]);
    cplx term = atom.c;
    for (std::size_t k = 0; k < count; ++k) {
      out[k] += term;
      term *= ab * (atom.beta + static_cast<double>(k)) / static_cast<double>(k + 1);
    }
  }
  return out;
}

Eigen::MatrixXcd wcomp_matrix(const DiskMap& m, std::size_t n) {
  if (n > kMaxSection) throw InputError("wcomp_matrix: truncation degree above 256");
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<cplx> col = taylor_coefficients(m.u(), n);  // u phi^0
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = col[i];
    col = truncated_product(col, m.phi(), n);
  }
  return w;
}

double nevanlinna(const Polynomial& phi_in, cplx w) {
  const Polynomial phi = trimmed(phi_in);
  if (phi.size() < 2) throw InputError("nevanlinna needs a nonconstant phi");
  if (std::abs(w - phi[0]) <= 1e-14 * (1.0 + std::abs(w))) throw DomainError("nevanlinna is undefined at w = phi(0)");
  Polynomial p = phi;
  p[0] -= w;
  const std::size_t d = p.size() - 1;
  std::vector<cplx> roots;
  if (d == 1) {
    roots.push_back(-p[0] / p[1]);
  } else {
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 1; i < d; ++i) comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    for (std::size_t i = 0; i < d; ++i) comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d - 1)) = -p[i] / p[d];
    const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, false);
    if (solver.info() != Eigen::Success) throw ConsistencyError("nevanlinna: companion eigensolve failed");
    Polynomial dp(d);
    for (std::size_t k = 1; k <= d; ++k) dp[k - 1] = static_cast<double>(k) * p[k];
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(d); ++i) {
      cplx z = solver.eigenvalues()(i);
      for (int it = 0; it < 8; ++it) {  // Newton polish, kept only while it helps
        const cplx f = eval_poly(p, z), df = eval_poly(dp, z);
        if (df == 0.0) break;
        const cplx next = z - f / df;
        if (std::abs(eval_poly(p, next)) >= std::abs(f)) break;
        z = next;
      }
      roots.push_back(z);
    }
  }
  double sum = 0.0;
  for (const cplx& z : roots) {
    const double res = std::abs(eval_poly(p, z));
    if (res > 1e-10) throw ConsistencyError("nevanlinna: root residual " + fmt(res) + " exceeds 1e-10");
    if (std::norm(z) < 1.0) sum += 1.0 - std::norm(z);
  }
  return sum;
}

nlohmann::json IntegralReport::to_json() const {
  return {{"value", value}, {"std_error", std_error}, {"tail_ratio", tail_ratio}, {"divergent", divergent},
          {"warnings", warnings}};
}

IntegralReport besov_seminorm(const HoloFunction& g, double p, const QuadratureSpec& spec) {
  if (!(p > 0.0)) throw InputError("besov_seminorm needs p > 0");
  const std::size_t n = g.dim();
  const HoloFunction rg = radial_derivative(g);
  IntegralReport out;
  if (rg.is_zero()) return out;
  const double e = -static_cast<double>(n) - 1.0;
  auto f = [&](const Point& w) {
    const double d = 1.0 - w.norm_sq();
    return std::pow(d * std::abs(rg(w)), p) * std::pow(d, e);
  };
  finish_tail(out, integrate_ball(n, f, {}, spec));
  if (p <= static_cast<double>(n))
    out.warnings.push_back("p <= n: the seminorm is infinite for every nonconstant g");
  return out;
}

AtomicMeasure volterra_measure(const HoloFunction& g, std::size_t samples, std::size_t shells, std::uint64_t seed) {
  const std::size_t n = g.dim();
  const HoloFunction rg = radial_derivative(g);
  if (rg.is_zero()) return AtomicMeasure(n);
  const double c1 = static_cast<double>(n + 1);
  std::vector<Point> pts;
  std::vector<double> wts;
  for (const auto& s : sample_ball(n, samples, shells, seed)) {
    const double w = s.weight * std::norm(rg(s.point)) * c1 * (1.0 - s.point.norm_sq());
    if (w > 0.0) {
      pts.push_back(s.point);
      wts.push_back(w);
    }
  }
  return AtomicMeasure(n, std::move(pts), std::move(wts));
}

double criterion_default_t(std::size_t n, double p) {
  const double nd = static_cast<double>(n);
  return std::max(2.0 * (nd + 1.0) / p - nd, t_threshold(n, 0.5 * p) + 0.5);
}

IntegralReport schatten_criterion_integral(const CriterionSource& source, double p, double t, const CriterionSpec& spec) {
  if (!(p > 0.0)) throw InputError("schatten_criterion_integral needs p > 0");
  const double half = 0.5 * p;
  IntegralReport out;
  if (const auto* v = std::get_if<VolterraSource>(&source)) {
    const std::size_t n = v->g.dim();
    const double tp = t_threshold(n, half);
    if (!(t > tp))
      throw ParameterError("criterion integral requires t > t_p = max(n/p - n, 0) = " + fmt(tp) + " at p/2, got t = " + fmt(t));
    const HoloFunction rg = radial_derivative(v->g);
    if (rg.is_zero()) return out;
    const double nd = static_cast<double>(n);
    const double c1 = nd + 1.0;
    const auto base = sample_ball(n, spec.inner_samples, spec.inner_shells, spec.outer.seed ^ 0x5eedULL);
    auto outer = [&](const Point& w) {
      const double dw = 1.0 - w.norm_sq();
      auto inner = [&](const Point& z) {
        return std::norm(rg(z)) * c1 * (1.0 - z.norm_sq()) * std::pow(std::abs(1.0 - herm_inner(z, w)), -(2.0 * nd + t));
      };
      const double st = std::pow(dw, nd + t) * integrate_ball_shifted(inner, w, base);
      return std::pow(st, half) * std::pow(dw, -nd - 1.0);
    };
    finish_tail(out, integrate_ball(n, outer, {}, spec.outer));
    return out;
  }
  const auto& m = std::get<WcompSource>(source).map;
  const AtomicMeasure mu = pullback_measure(m, spec.grid_size);
  const StNorm r = st_lambda_norm(mu, t, half, spec.st);
  out.value = r.pth_power;
  out.std_error = r.value > 0.0 ? r.std_error * half * r.pth_power / r.value : 0.0;
  out.divergent = !r.decaying;
  out.tail_ratio = r.tail_ratio;
  out.warnings = r.warnings;
  return out;
}

IntegralReport nevanlinna_kernel_integral(const Polynomial& phi, double p, double t, const CriterionSpec& spec) {
  if (!(p > 0.0)) throw InputError("nevanlinna_kernel_integral needs p > 0");
  const double tp = t_threshold(1, 0.5 * p);
  if (!(t > tp))
    throw ParameterError("criterion integral requires t > t_p = max(n/p - n, 0) = " + fmt(tp) + " at p/2, got t = " + fmt(t));
  const Polynomial ph = trimmed(phi);
  if (ph.size() < 2) throw InputError("nevanlinna_kernel_integral needs a nonconstant phi");
  // N*_phi dA as quadrature atoms
  std::vector<Point> pts;
  std::vector<double> wts;
  for (const auto& s : sample_ball(1, spec.inner_samples, spec.inner_shells, spec.outer.seed ^ 0x5eedULL)) {
    if (std::abs(s.point[0] - ph[0]) <= 1e-14) continue;
    const double w = s.weight * nevanlinna(ph, s.point[0]);
    if (w > 0.0) {
      pts.push_back(s.point);
      wts.push_back(w);
    }
  }
  IntegralReport out;
  if (pts.empty()) return out;
  const AtomicMeasure nu(1, std::move(pts), std::move(wts));
  const auto& kern = simd::kernels();
  auto f = [&](const Point& w) {
    const double d = 1.0 - w.norm_sq();
    const double inner = std::pow(d, 1.0 + t) * kern.kernel_power_sum(nu.block(), w.coords().data(), 4.0 + t);
    return std::pow(inner, 0.5 * p) / (d * d);
  };
  finish_tail(out, integrate_ball(1, f, {}, spec.outer));
  return out;
}

IntegralReport nevanlinna_criterion_integral(const Polynomial& phi, double p, const QuadratureSpec& spec) {
  if (!(p > 0.0)) throw InputError("nevanlinna_criterion_integral needs p > 0");
  const Polynomial ph = trimmed(phi);
  if (ph.size() < 2) throw InputError("nevanlinna_criterion_integral needs a nonconstant phi");
  const cplx phi0 = ph[0];
  auto f = [&](const Point& w) {
    if (std::abs(w[0] - phi0) <= 1e-14 * (1.0 + std::abs(w[0]))) return 0.0;  // a null set
    const double r = std::abs(w[0]);
    return std::pow(nevanlinna(ph, w[0]) / (1.0 - r), 0.5 * p) * std::pow(1.0 - r * r, -2.0);
  };
  IntegralReport out;
  finish_tail(out, integrate_ball(1, f, {}, spec));
  return out;
}

}  // namespace qmu

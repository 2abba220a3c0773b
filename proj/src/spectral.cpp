#include "qmu/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "qmu/errors.hpp"

namespace qmu {

cplx qmu_apply(const AtomicMeasure& mu, const HoloFunction& f, const Point& z) {
  if (z.dim() != mu.dim() || f.dim() != mu.dim()) throw InputError("qmu_apply: dimension mismatch");
  const double n = static_cast<double>(mu.dim());
  cplx sum = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const Point& zj = mu.points()[j];
    sum += mu.weights()[j] * f(zj) * std::pow(1.0 - herm_inner(z, zj), -n);
  }
  return sum;
}

HoloFunction qmu_function(const AtomicMeasure& mu, const HoloFunction& f) {
  if (f.dim() != mu.dim()) throw InputError("qmu_function: dimension mismatch");
  HoloFunction g(mu.dim());
  const double n = static_cast<double>(mu.dim());
  for (std::size_t j = 0; j < mu.size(); ++j) g.add_atom(mu.weights()[j] * f(mu.points()[j]), mu.points()[j], n);
  return g;
}

Eigen::MatrixXcd gram_matrix(const AtomicMeasure& mu) {
  const AtomicMeasure m = mu.merged();
  if (m.size() > kMaxGramSize) throw InputError("gram_matrix: more than 4096 atoms");
  const std::size_t size = m.size();
  Eigen::MatrixXcd g(size, size);
  const auto& kern = simd::kernels();
  const int power = static_cast<int>(m.dim());
  for (std::size_t i = 0; i < size; ++i) {
    // rows are written into contiguous columns, then transposed
    kern.gram_row(m.block(), i, power, g.col(static_cast<Eigen::Index>(i)).data());
  }
  g.transposeInPlace();
  // the two triangles round differently; keep the lower one
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    g(j, j) = g(j, j).real();
    for (Eigen::Index i = 0; i < j; ++i) g(i, j) = std::conj(g(j, i));
  }
  return g;
}

nlohmann::json SpectrumResult::to_json() const {
  return {{"eigenvalues", eigenvalues}, {"trace", trace}, {"rank_cutoff", rank_cutoff}, {"residual", residual}};
}

SpectrumResult gram_spectrum(const AtomicMeasure& mu, bool keep_vectors) {
  const AtomicMeasure m = mu.merged();
  SpectrumResult out;
  out.points = m.points();
  out.weights = m.weights();
  if (m.empty()) return out;
  const Eigen::MatrixXcd g = gram_matrix(m);
  const double scale = g.cwiseAbs().maxCoeff();
  const double asym = (g - g.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-14 * scale) throw ConsistencyError("gram_spectrum: matrix is not Hermitian to 1e-14");

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(g, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw ConsistencyError("gram_spectrum: eigensolver did not converge");
  const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
  const Eigen::MatrixXcd& vec = solver.eigenvectors();
  const auto size = ev.size();
  const double lmax = ev(size - 1);
  out.min_raw_eigenvalue = ev(0);
  if (ev(0) < -1e-10 * lmax)
    throw ConsistencyError("gram_spectrum: eigenvalue " + std::to_string(ev(0)) + " violates positivity");

  const Eigen::MatrixXcd r = g * vec - vec * ev.asDiagonal();
  out.residual = r.colwise().norm().maxCoeff();
  out.trace = g.diagonal().real().sum();
  out.rank_cutoff = kRankCutoff * lmax;
  out.eigenvalues.resize(static_cast<std::size_t>(size));
  for (Eigen::Index k = 0; k < size; ++k) out.eigenvalues[static_cast<std::size_t>(k)] = std::max(0.0, ev(size - 1 - k));
  if (keep_vectors) out.eigenvectors = vec.rowwise().reverse();
  return out;
}

double op_norm_h2(const AtomicMeasure& mu) { return gram_spectrum(mu).lambda_max(); }

double schatten_norm(const SpectrumResult& spec, double p) {
  if (!(p > 0.0)) throw InputError("schatten_norm needs p > 0");
  if (spec.eigenvalues.empty() || spec.lambda_max() == 0.0) return 0.0;
  const double top = spec.lambda_max();
  double s = 0.0;
  for (double l : spec.eigenvalues) {
    if (p < 1.0 && l < spec.rank_cutoff) continue;
    s += std::pow(l / top, p);
  }
  return top * std::pow(s, 1.0 / p);
}

double schatten_norm(const AtomicMeasure& mu, double p) { return schatten_norm(gram_spectrum(mu), p); }

std::vector<double> embedding_singular_values(const AtomicMeasure& mu) {
  std::vector<double> s = gram_spectrum(mu).eigenvalues;
  for (double& x : s) x = std::sqrt(x);
  return s;
}

double pairing_check(const AtomicMeasure& mu, const Point& a, const Point& b) {
  const HoloFunction ka = HoloFunction::szego_kernel(a);
  const HoloFunction kb = HoloFunction::szego_kernel(b);
  const cplx lhs = qmu_apply(mu, ka, b);  // <Q_mu K_a, K_b> = (Q_mu K_a)(b)
  cplx rhs = 0.0;
  double scale = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const cplx fa = ka(mu.points()[j]), fb = kb(mu.points()[j]);
    rhs += mu.weights()[j] * fa * std::conj(fb);
    scale += mu.weights()[j] * std::abs(fa) * std::abs(fb);
  }
  return scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0;
}

namespace {

HoloFunction random_polynomial(std::size_t n, int degree, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  HoloFunction f(n);
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; b <= (n >= 2 ? degree - a : 0); ++b) f.add_monomial(MultiIndex{a, b}, cplx(g(rng), g(rng)));
  return f;
}

}  // namespace

ProbeResult opnorm_probe_hp_hq(const AtomicMeasure& mu, double p, double q, const ProbeSpec& spec) {
  if (!(p > 1.0) || !(q > 1.0)) throw InputError("opnorm_probe_hp_hq needs p, q > 1");
  const std::size_t n = mu.dim();
  const auto nodes = sample_sphere(n, spec.sphere_nodes, spec.seed);
  ProbeResult out;
  auto try_probe = [&](const std::string& name, const HoloFunction& f) {
    const double fp = hardy_norm(f, p, nodes).value;
    if (!(fp > 0.0)) return;
    const double ratio = hardy_norm(qmu_function(mu, f), q, nodes).value / fp;
    out.log.push_back({name, ratio});
    if (ratio > out.lower_bound) {
      out.lower_bound = ratio;
      out.best_probe = name;
    }
  };
  try_probe("constant", HoloFunction::constant(n, 1.0));
  for (std::size_t j = 0; j < mu.size(); ++j)
    for (double power : spec.kernel_powers)
      try_probe("kernel[" + std::to_string(j) + "]^" + std::to_string(power),
                HoloFunction::kernel(mu.points()[j], power * static_cast<double>(n)));
  if (spec.top_eigenvector && !mu.empty()) {
    const SpectrumResult s = gram_spectrum(mu, true);
    HoloFunction g(n);
    for (std::size_t j = 0; j < s.points.size(); ++j)
      g.add_atom(s.eigenvectors(static_cast<Eigen::Index>(j), 0) * std::sqrt(s.weights[j]), s.points[j],
                 static_cast<double>(n));
    try_probe("top_eigenvector", g);
  }
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = 0; i < spec.random_polynomials; ++i)
    try_probe("polynomial[" + std::to_string(i) + "]", random_polynomial(n, spec.polynomial_degree, rng));
  return out;
}

double compactness_tail(const AtomicMeasure& mu, std::size_t k) {
  if (k == 0) throw InputError("compactness_tail: k is 1-based");
  const SpectrumResult s = gram_spectrum(mu);
  return k <= s.eigenvalues.size() ? s.eigenvalues[k - 1] : 0.0;
}

}  // namespace qmu

#pragma once
// Q_mu f(z) = integral f(w) (1 - <z,w>)^{-n} dmu(w) on H^2 and its spectral
// data. For atomic mu, Q_mu = sum_j c_j K_{z_j} <., K_{z_j}> is unitarily
// equivalent to the weighted Gram matrix M_ij = sqrt(c_i c_j) (1 - <z_i,z_j>)^{-n}.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qmu/holo.hpp"
#include "qmu/measure.hpp"

namespace qmu {

/// Largest atom count accepted by the dense eigensolver.
inline constexpr std::size_t kMaxGramSize = 4096;

/// Q_mu f(z) = sum_j c_j f(z_j) (1 - <z, z_j>)^{-n}
cplx qmu_apply(const AtomicMeasure& mu, const HoloFunction& f, const Point& z);

/// Q_mu f as a HoloFunction: sum_j c_j f(z_j) K_{z_j}.
HoloFunction qmu_function(const AtomicMeasure& mu, const HoloFunction& f);

/// Weighted Gram matrix of mu after merging atoms closer than kMergeTolerance.
Eigen::MatrixXcd gram_matrix(const AtomicMeasure& mu);

struct SpectrumResult {
  /// Nonincreasing, clipped at zero.
  std::vector<double> eigenvalues;
  /// Eigenvalues below this are treated as zero for p < 1 Schatten sums.
  double rank_cutoff = 0.0;
  /// max_k ||M v_k - lambda_k v_k||
  double residual = 0.0;
  double trace = 0.0;
  /// Smallest eigenvalue before clipping.
  double min_raw_eigenvalue = 0.0;
  /// Columns are eigenvectors, aligned with eigenvalues (empty unless requested).
  Eigen::MatrixXcd eigenvectors;
  /// Atoms of the merged measure, aligned with the rows of eigenvectors.
  std::vector<Point> points;
  std::vector<double> weights;

  double lambda_max() const { return eigenvalues.empty() ? 0.0 : eigenvalues.front(); }
  nlohmann::json to_json() const;
};

/// Relative cutoff for the numerical rank.
inline constexpr double kRankCutoff = 1e-12;

/// Throws InputError above kMaxGramSize atoms and ConsistencyError if the
/// matrix is not Hermitian to 1e-14 or has eigenvalues below -1e-10 lambda_max.
SpectrumResult gram_spectrum(const AtomicMeasure& mu, bool keep_vectors = false);

double op_norm_h2(const AtomicMeasure& mu);

/// (sum lambda_j^p)^{1/p}; for p < 1 eigenvalues below rank_cutoff are dropped.
double schatten_norm(const SpectrumResult& spec, double p);
double schatten_norm(const AtomicMeasure& mu, double p);

/// Singular values of the Carleson embedding R_mu: sqrt of the eigenvalues of Q_mu.
std::vector<double> embedding_singular_values(const AtomicMeasure& mu);

/// |<Q_mu K_a, K_b> - integral K_a conj(K_b) dmu| relative to the integral of |K_a K_b| dmu.
double pairing_check(const AtomicMeasure& mu, const Point& a, const Point& b);

struct ProbeSpec {
  /// Sphere nodes for the Hardy norms (grid for n = 1, seeded for n >= 2).
  std::size_t sphere_nodes = 4096;
  std::size_t random_polynomials = 8;
  int polynomial_degree = 6;
  /// Normalized kernels K_z^beta / ||.||, beta = n * kernel_power, at each atom.
  std::vector<double> kernel_powers = {1.0, 2.0};
  bool top_eigenvector = true;
  std::uint64_t seed = 1;
};

struct ProbeEntry {
  std::string name;
  double ratio;
};

struct ProbeResult {
  /// max over probes of ||Q_mu f||_{H^q} / ||f||_{H^p}: a lower bound for the norm.
  double lower_bound = 0.0;
  std::string best_probe;
  std::vector<ProbeEntry> log;
};

/// Probe-based lower bound for ||Q_mu||_{H^p -> H^q}, p, q > 1.
ProbeResult opnorm_probe_hp_hq(const AtomicMeasure& mu, double p, double q, const ProbeSpec& spec = {});

/// k-th largest eigenvalue (k >= 1); zero beyond the number of atoms.
double compactness_tail(const AtomicMeasure& mu, std::size_t k);

}  // namespace qmu

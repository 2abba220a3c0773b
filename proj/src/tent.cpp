#include "qmu/tent.hpp"

#include <algorithm>
#include <cmath>

#include "qmu/errors.hpp"
#include "qmu/simd/kernels.hpp"

namespace qmu {

nlohmann::json TentSequence::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const cplx& v : values) j.push_back({v.real(), v.imag()});
  return j;
}

TentSequence TentSequence::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InputError("tent sequence: expected an array");
  TentSequence s;
  for (const auto& e : j) {
    if (e.is_number()) {
      s.values.emplace_back(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2) {
      s.values.emplace_back(e[0].get<double>(), e[1].get<double>());
    } else {
      throw InputError("tent sequence: entries are numbers or [re, im] pairs");
    }
  }
  return s;
}

namespace {

void check_aligned(const TentSequence& s, const Lattice& z) {
  if (s.size() != z.size())
    throw InputError("tent sequence has " + std::to_string(s.size()) + " entries for " + std::to_string(z.size()) +
                     " lattice centers");
}

}  // namespace

TentNorm tent_norm(const TentSequence& lambda, const Lattice& z, double p, double q,
                   std::span<const BoundaryPoint> nodes, double gamma) {
  check_aligned(lambda, z);
  if (!(p > 0.0) || !(q > 0.0)) throw InputError("tent_norm needs p, q > 0");
  if (p == kInfinity) throw InputError("tent_norm: p must be finite");
  if (!(gamma > 1.0)) throw InputError("tent_norm: aperture must exceed 1");
  if (nodes.empty()) throw InputError("tent_norm needs sphere nodes");

  const std::size_t count = z.size();
  std::vector<double> ones(count, 1.0), thresholds_sq(count), values(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double d = 0.5 * gamma * (1.0 - z.centers()[k].norm_sq());
    thresholds_sq[k] = d * d;
    values[k] = q == kInfinity ? std::abs(lambda.values[k]) : std::pow(std::abs(lambda.values[k]), q);
  }
  const simd::AtomBlock block = simd::AtomBlock::build(std::span<const Point>(z.centers()), ones);
  const auto& kern = simd::kernels();

  TentNorm out;
  std::vector<double> dist(count);
  double sum = 0.0;
  for (const auto& zeta : nodes) {
    if (zeta.dim() != z.dim()) throw InputError("tent_norm: dimension mismatch");
    kern.distances_sq(block, zeta.coords().data(), dist.data());
    bool hit = false;
    double inner = 0.0;
    if (q == kInfinity) {
      for (std::size_t k = 0; k < count; ++k)
        if (dist[k] < thresholds_sq[k]) {
          hit = true;
          inner = std::max(inner, values[k]);
        }
      inner = std::pow(inner, p);
    } else {
      for (std::size_t k = 0; k < count && !hit; ++k) hit = dist[k] < thresholds_sq[k];
      inner = std::pow(kern.masked_sum(block, zeta.coords().data(), values.data(), thresholds_sq.data()), p / q);
    }
    if (!hit) ++out.empty_nodes;
    sum += inner;
  }
  if (out.empty_nodes == nodes.size()) {
    out.warnings.push_back("no lattice center lies in any sampled approach region");
    return out;
  }
  out.value = std::pow(sum / static_cast<double>(nodes.size()), 1.0 / p);
  return out;
}

cplx tent_pairing(const TentSequence& lambda, const TentSequence& mu, const Lattice& z) {
  check_aligned(lambda, z);
  check_aligned(mu, z);
  const double n = static_cast<double>(z.dim());
  cplx s = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k)
    s += lambda.values[k] * std::conj(mu.values[k]) * std::pow(1.0 - z.centers()[k].norm_sq(), n);
  return s;
}

double synthesis_threshold(std::size_t n, double p) {
  if (!(p > 0.0)) throw InputError("synthesis_threshold needs p > 0");
  return static_cast<double>(n) * std::max(1.0, 2.0 / p);
}

HoloFunction synthesis(const TentSequence& lambda, const Lattice& z, double b) {
  check_aligned(lambda, z);
  if (!(b > 0.0)) throw InputError("synthesis needs b > 0");
  HoloFunction f(z.dim());
  for (std::size_t k = 0; k < z.size(); ++k)
    if (lambda.values[k] != 0.0)
      f.add_atom(lambda.values[k] * std::pow(1.0 - z.centers()[k].norm_sq(), b), z.centers()[k], b);
  return f;
}

}  // namespace qmu

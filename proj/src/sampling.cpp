#include "qmu/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "qmu/errors.hpp"
#include "qmu/simd/kernels.hpp"

namespace qmu {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxRadius = 1.0 - 1e-12;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

Coords gaussian_direction(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Coords c(n);
  double r2 = 0.0;
  do {
    for (std::size_t k = 0; k < n; ++k) c[k] = cplx(g(rng), g(rng));
    r2 = c.norm_sq();
  } while (r2 < 1e-300);
  return (1.0 / std::sqrt(r2)) * c;
}

cplx uniform_in_disk(double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius * std::sqrt(u(rng));
  return std::polar(r, kTwoPi * u(rng));
}

// Bounding cylinder of {z : |1 - <z,zeta>| < delta} in the frame of zeta:
// lambda = <z,zeta> in the disk D(1, delta), transverse part v with
// |v|^2 < 2 delta. Normalized volume n * delta^2 * (2 delta)^{n-1}.
double cylinder_volume(std::size_t n, double delta) {
  return static_cast<double>(n) * delta * delta * std::pow(2.0 * delta, static_cast<double>(n - 1));
}

Coords assemble(const std::array<Coords, kMaxDim>& frame, std::size_t n, cplx lambda, cplx v) {
  Coords z = lambda * frame[0];
  if (n == 2) z += v * frame[1];
  return z;
}

// Dyadic depth band j: 1 - |z|^2 in (2^{-j-1}, 2^{-j}].
struct DepthLayers {
  std::size_t count;
  double min_depth;
};

DepthLayers depth_layers(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("truncation eps must lie in (0, 1)");
  const double min_depth = 1.0 - (1.0 - eps) * (1.0 - eps);
  std::size_t j = 0;
  while (std::ldexp(1.0, -static_cast<int>(j) - 1) > min_depth) ++j;
  return {j + 1, min_depth};
}

bool accept_in_layer(const Coords& z, std::size_t layer, double gamma, const BoundaryPoint& zeta, double min_depth) {
  const double depth = 1.0 - z.norm_sq();
  if (!(depth > 0.0) || depth < min_depth) return false;
  if (!(depth > std::ldexp(1.0, -static_cast<int>(layer) - 1) && depth <= std::ldexp(1.0, -static_cast<int>(layer))))
    return false;
  return std::abs(1.0 - herm_inner(z, zeta)) < 0.5 * gamma * depth;
}

}  // namespace

std::vector<BoundaryPoint> sample_sphere(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m == 0) throw InputError("sample_sphere needs m >= 1");
  if (n == 0 || n > kMaxDim) throw InputError("sample_sphere: unsupported dimension");
  std::vector<BoundaryPoint> out;
  out.reserve(m);
  if (n == 1) {
    for (std::size_t k = 0; k < m; ++k) {
      // Exact values at the quarter turns keep {1, i, -1, -i} exact for m = 4.
      const std::size_t q = 4 * k;
      cplx z;
      if (q % m == 0) {
        static const cplx quarter[] = {1.0, cplx(0.0, 1.0), -1.0, cplx(0.0, -1.0)};
        z = quarter[(q / m) % 4];
      } else {
        z = std::polar(1.0, kTwoPi * static_cast<double>(k) / static_cast<double>(m));
      }
      out.emplace_back(Coords{z});
    }
    return out;
  }
  auto rng = make_rng(seed);
  for (std::size_t k = 0; k < m; ++k) out.emplace_back(gaussian_direction(n, rng));
  return out;
}

ShellLayout::ShellLayout(std::size_t dim, std::size_t shells) : dim_(dim), shells_(shells) {
  if (shells == 0) throw InputError("ShellLayout needs at least one shell");
  if (dim == 0 || dim > kMaxDim) throw InputError("ShellLayout: unsupported dimension");
}

double ShellLayout::inner_radius(std::size_t j) const { return j == 0 ? 0.0 : 1.0 - std::ldexp(1.0, -static_cast<int>(j)); }

double ShellLayout::outer_radius(std::size_t j) const {
  return j + 1 >= shells_ ? 1.0 : 1.0 - std::ldexp(1.0, -static_cast<int>(j) - 1);
}

double ShellLayout::volume(std::size_t j) const {
  const double e = 2.0 * static_cast<double>(dim_);
  return std::pow(outer_radius(j), e) - std::pow(inner_radius(j), e);
}

std::size_t ShellLayout::shell_of_depth(double depth) const {
  depth = std::clamp(depth, 0.0, 1.0);
  const double one_minus_r = depth / (1.0 + std::sqrt(1.0 - depth));
  if (one_minus_r <= 0.0) return shells_ - 1;
  // 1 - r in (2^{-j-1}, 2^{-j}]  <=>  shell j
  int exp2 = 0;
  const double mant = std::frexp(one_minus_r, &exp2);  // one_minus_r = mant * 2^exp2, mant in [0.5, 1)
  long j = -static_cast<long>(exp2);
  if (mant == 0.5) j += 1;  // exact power of two 2^{-j} belongs to shell j
  j = std::max(0L, j);
  return std::min<std::size_t>(static_cast<std::size_t>(j), shells_ - 1);
}

std::vector<BallSample> sample_ball(std::size_t n, std::size_t m, std::size_t shells, std::uint64_t seed) {
  if (shells == 0) throw InputError("sample_ball needs shells >= 1");
  if (m < shells) throw InputError("sample_ball needs at least one sample per shell");
  const ShellLayout layout(n, shells);
  auto rng = make_rng(seed, 0x5eedba11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double e = 2.0 * static_cast<double>(n);

  std::vector<BallSample> out;
  out.reserve(m);
  for (std::size_t j = 0; j < shells; ++j) {
    const std::size_t mj = m / shells + (j < m % shells ? 1 : 0);
    const double a = std::pow(layout.inner_radius(j), e);
    const double b = std::pow(layout.outer_radius(j), e);
    const double weight = layout.volume(j) / static_cast<double>(mj);
    std::vector<std::size_t> perm(mj);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < mj; ++i) {
      const double t = (static_cast<double>(i) + u(rng)) / static_cast<double>(mj);
      const double r = std::min(std::pow(a + t * (b - a), 1.0 / e), kMaxRadius);
      Coords dir(n);
      if (n == 1) {
        // Latin-hypercube pairing of radius and angle strata.
        const double theta = kTwoPi * (static_cast<double>(perm[i]) + u(rng)) / static_cast<double>(mj);
        dir[0] = std::polar(1.0, theta);
      } else {
        dir = gaussian_direction(n, rng);
      }
      out.push_back({Point(r * dir), weight, j});
    }
  }
  return out;
}

Estimate ball_estimate(std::span<const BallSample> samples, const std::function<double(const Point&)>& f) {
  if (samples.empty()) return {};
  std::size_t shells = 0;
  for (const auto& s : samples) shells = std::max(shells, s.shell + 1);
  std::vector<double> sum(shells, 0.0), sum_sq(shells, 0.0), weight(shells, 0.0);
  std::vector<std::size_t> count(shells, 0);
  for (const auto& s : samples) {
    const double y = f(s.point);
    sum[s.shell] += y;
    sum_sq[s.shell] += y * y;
    weight[s.shell] = s.weight;
    ++count[s.shell];
  }
  Estimate est;
  double var = 0.0;
  for (std::size_t j = 0; j < shells; ++j) {
    if (count[j] == 0) continue;
    const double mj = static_cast<double>(count[j]);
    const double vol = weight[j] * mj;
    const double mean = sum[j] / mj;
    est.value += vol * mean;
    if (count[j] > 1) {
      const double s2 = std::max(0.0, (sum_sq[j] - mj * mean * mean) / (mj - 1.0));
      var += vol * vol * s2 / mj;
    }
  }
  est.std_error = std::sqrt(var);
  return est;
}

BallIntegral integrate_ball(std::size_t n, const std::function<double(const Point&)>& f, std::span<const Point> anchors,
                            const QuadratureSpec& spec) {
  const ShellLayout layout(n, spec.shells);
  const std::size_t m = spec.samples_per_component;
  if (m < spec.shells) throw InputError("integrate_ball: fewer samples than shells");
  const std::size_t components = anchors.size() + 1;

  // Base density of sample_ball at a point of shell j: m_j / (m vol_j).
  std::vector<double> shell_density(spec.shells);
  for (std::size_t j = 0; j < spec.shells; ++j) {
    const std::size_t mj = m / spec.shells + (j < m % spec.shells ? 1 : 0);
    shell_density[j] = static_cast<double>(mj) / (static_cast<double>(m) * layout.volume(j));
  }

  std::vector<double> ones(anchors.size(), 1.0);
  const simd::AtomBlock block = simd::AtomBlock::build(anchors, ones);
  const auto& kern = simd::kernels();
  std::vector<double> dist(anchors.size());
  const double np1 = static_cast<double>(n + 1);

  BallIntegral result;
  result.shell_contributions.assign(spec.shells, 0.0);
  double sum = 0.0, sum_sq = 0.0;
  const double total = static_cast<double>(components * m);

  for (std::size_t c = 0; c < components; ++c) {
    const auto base = sample_ball(n, m, spec.shells, spec.seed * 0x9E3779B97F4A7C15ULL + c);
    for (const auto& s : base) {
      const Point w = c == 0 ? s.point : mobius(anchors[c - 1], s.point);
      const double depth_w = 1.0 - w.norm_sq();
      double q = shell_density[layout.shell_of_depth(depth_w)];
      if (!anchors.empty()) {
        kern.distances_sq(block, w.coords().data(), dist.data());
        for (std::size_t k = 0; k < anchors.size(); ++k) {
          const double closeness = std::min(1.0, block.one_minus_norm_sq[k] * depth_w / dist[k]);
          const double jac = std::pow(closeness / depth_w, np1);
          q += shell_density[layout.shell_of_depth(closeness)] * jac;
        }
      }
      const double y = f(w) / (static_cast<double>(m) * q);
      sum += y;
      sum_sq += y * y * total * total;
      result.shell_contributions[layout.shell_of_depth(depth_w)] += y;
    }
  }
  result.value = sum;
  const double mean_z = sum;  // E[total * y] == value
  const double var_z = std::max(0.0, sum_sq / total - mean_z * mean_z);
  result.std_error = std::sqrt(var_z / total);

  // Tail decay: compare the last three shells with the three before them.
  const auto& sc = result.shell_contributions;
  const std::size_t S = sc.size();
  if (S >= 6) {
    const double outer = std::abs(sc[S - 1]) + std::abs(sc[S - 2]) + std::abs(sc[S - 3]);
    const double inner = std::abs(sc[S - 4]) + std::abs(sc[S - 5]) + std::abs(sc[S - 6]);
    if (outer == 0.0) {
      result.tail_ratio = 0.0;
    } else if (inner == 0.0) {
      result.tail_ratio = std::numeric_limits<double>::infinity();
    } else {
      result.tail_ratio = std::cbrt(outer / inner);
    }
    result.decaying = result.tail_ratio < spec.divergence_ratio;
  }
  return result;
}

double integrate_ball_shifted(const std::function<double(const Point&)>& f, const Point& center,
                              std::span<const BallSample> base) {
  double s = 0.0;
  for (const auto& b : base) s += b.weight * f(mobius(center, b.point)) * mobius_jacobian(center, b.point.coords());
  return s;
}

std::vector<BallSample> sample_approach_region(const BoundaryPoint& zeta, double gamma, double eps,
                                               std::size_t per_layer, std::uint64_t seed) {
  if (!(gamma > 1.0)) throw InputError("approach region needs gamma > 1");
  const std::size_t n = zeta.dim();
  if (n > 2) throw InputError("sample_approach_region: only n <= 2 supported");
  const auto frame = unitary_frame(zeta);
  const DepthLayers layers = depth_layers(eps);
  auto rng = make_rng(seed, 0xa44c);
  std::vector<BallSample> out;
  for (std::size_t j = 0; j < layers.count; ++j) {
    const double delta = std::min(2.0, 0.5 * gamma * std::ldexp(1.0, -static_cast<int>(j)));
    const double weight = cylinder_volume(n, delta) / static_cast<double>(per_layer);
    for (std::size_t i = 0; i < per_layer; ++i) {
      const cplx lambda = 1.0 + uniform_in_disk(delta, rng);
      const cplx v = n == 2 ? uniform_in_disk(std::sqrt(2.0 * delta), rng) : cplx(0.0);
      const Coords z = assemble(frame, n, lambda, v);
      if (accept_in_layer(z, j, gamma, zeta, layers.min_depth)) out.push_back({Point(z), weight, j});
    }
  }
  return out;
}

std::vector<Point> approach_region_grid(const BoundaryPoint& zeta, double gamma, double eps, std::size_t resolution) {
  if (!(gamma > 1.0)) throw InputError("approach region needs gamma > 1");
  if (resolution == 0) throw InputError("approach_region_grid needs resolution >= 1");
  const std::size_t n = zeta.dim();
  if (n > 2) throw InputError("approach_region_grid: only n <= 2 supported");
  const auto frame = unitary_frame(zeta);
  const DepthLayers layers = depth_layers(eps);
  const std::size_t k = resolution;
  auto node = [k](std::size_t i) { return -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(k); };
  std::vector<Point> out;
  for (std::size_t j = 0; j < layers.count; ++j) {
    const double delta = std::min(2.0, 0.5 * gamma * std::ldexp(1.0, -static_cast<int>(j)));
    const double vr = std::sqrt(2.0 * delta);
    const std::size_t vk = n == 2 ? k + 1 : 1;
    for (std::size_t a = 0; a <= k; ++a)
      for (std::size_t b = 0; b <= k; ++b) {
        const cplx lambda = 1.0 + delta * cplx(node(a), node(b));
        for (std::size_t c = 0; c < vk; ++c)
          for (std::size_t d = 0; d < vk; ++d) {
            const cplx v = n == 2 ? vr * cplx(node(c), node(d)) : cplx(0.0);
            const Coords z = assemble(frame, n, lambda, v);
            if (accept_in_layer(z, j, gamma, zeta, layers.min_depth)) out.emplace_back(z);
          }
      }
  }
  return out;
}

std::vector<Point> sample_koranyi_box(const BoundaryPoint& zeta, double delta, std::size_t count, std::uint64_t seed) {
  if (!(delta > 0.0 && delta <= 2.0)) throw InputError("Koranyi box needs delta in (0, 2]");
  const std::size_t n = zeta.dim();
  if (n > 2) throw InputError("sample_koranyi_box: only n <= 2 supported");
  const auto frame = unitary_frame(zeta);
  auto rng = make_rng(seed, 0xb0c5);
  std::vector<Point> out;
  out.reserve(count);
  while (out.size() < count) {
    const cplx lambda = 1.0 + uniform_in_disk(delta, rng);
    const cplx v = n == 2 ? uniform_in_disk(std::sqrt(2.0 * delta), rng) : cplx(0.0);
    const Coords z = assemble(frame, n, lambda, v);
    if (z.norm_sq() < 1.0 && std::abs(1.0 - herm_inner(z, zeta)) < delta) out.emplace_back(z);
  }
  return out;
}

}  // namespace qmu

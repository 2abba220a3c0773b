#include "qmu/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "qmu/errors.hpp"
#include "qmu/spectral.hpp"

#ifndef QMU_VERSION
#define QMU_VERSION "0.0.0"
#endif

namespace qmu {

std::string_view library_version() { return QMU_VERSION; }

namespace {

constexpr std::pair<Experiment, std::string_view> kExperimentNames[] = {
    {Experiment::thm11_band, "thm1.1-band"},   {Experiment::thm12_band, "thm1.2-band"},
    {Experiment::thm62_band, "thm6.2-band"},   {Experiment::sec5_profile, "sec5-profile"},
    {Experiment::sec7_wcomp, "sec7-wcomp"},    {Experiment::sec7_volterra, "sec7-volterra"},
};

constexpr std::pair<FamilyKind, std::string_view> kFamilyNames[] = {
    {FamilyKind::boundary_accumulation, "boundary_accumulation"},
    {FamilyKind::lattice_uniform, "lattice_uniform"},
    {FamilyKind::random_cloud, "random_cloud"},
    {FamilyKind::from_file, "from_file"},
};

std::string_view family_name(FamilyKind k) {
  for (const auto& [kind, name] : kFamilyNames)
    if (kind == k) return name;
  return "?";
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Point along_e1(std::size_t n, double x) {
  Coords c(n);
  c[0] = x;
  return Point(c);
}

Point random_direction_point(std::size_t n, double rho, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Coords c(n);
  double norm_sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    c[k] = cplx(g(rng), g(rng));
    norm_sq += std::norm(c[k]);
  }
  c *= rho / std::sqrt(norm_sq);
  return Point(c);
}

double depth_of(const AtomicMeasure& m) {
  const double r = m.max_radius();
  return r > 0.0 ? std::log2(1.0 / (1.0 - r)) : 0.0;
}

std::size_t lattice_density(std::size_t n) { return n == 1 ? 6 : 2; }

std::vector<FamilyMember> boundary_family(const FamilySpec& s) {
  const double n = static_cast<double>(s.dim);
  std::vector<FamilyMember> out;
  for (std::size_t k = 0; k < s.members; ++k) {
    const std::size_t atoms = s.base_atoms + k;
    std::vector<Point> pts;
    std::vector<double> w;
    for (std::size_t j = 1; j <= atoms; ++j) {
      const double gap = std::ldexp(1.0, -static_cast<int>(j));
      pts.push_back(along_e1(s.dim, 1.0 - gap));
      w.push_back(std::pow(gap, n * s.rate));
    }
    AtomicMeasure m(s.dim, std::move(pts), std::move(w));
    out.push_back({static_cast<double>(atoms), std::move(m), nullptr});
  }
  return out;
}

std::vector<FamilyMember> lattice_family(const FamilySpec& s) {
  LatticeSpec ls;
  ls.dim = s.dim;
  ls.r = s.lattice_r;
  ls.cover_radius = s.lattice_cover;
  ls.candidate_density = lattice_density(s.dim);
  ls.seed = s.seed;
  auto lattice = std::make_shared<const Lattice>(build_lattice(ls));
  std::vector<double> radii;
  for (const Point& a : lattice->centers()) radii.push_back(a.norm());
  std::sort(radii.begin(), radii.end());
  const double n = static_cast<double>(s.dim);
  std::vector<FamilyMember> out;
  for (std::size_t k = 0; k < s.members; ++k) {
    // radius quantile (k+1)/members of the centers; ties at that radius included
    const std::size_t take = std::max<std::size_t>(1, (radii.size() * (k + 1) + s.members - 1) / s.members);
    const double rho = radii[take - 1];
    std::vector<Point> pts;
    std::vector<double> w;
    for (const Point& a : lattice->centers()) {
      if (a.norm() > rho) continue;
      pts.push_back(a);
      w.push_back(std::pow(1.0 - a.norm_sq(), n * s.weight_exponent));
    }
    AtomicMeasure m(s.dim, std::move(pts), std::move(w));
    const double param = depth_of(m);
    out.push_back({param, std::move(m), lattice});
  }
  return out;
}

std::vector<FamilyMember> cloud_family(const FamilySpec& s) {
  const double n = static_cast<double>(s.dim);
  std::vector<FamilyMember> out;
  for (std::size_t k = 0; k < s.members; ++k) {
    std::mt19937_64 rng(s.seed + k);
    std::uniform_real_distribution<double> beta(0.0, std::atanh(s.cloud_radius));
    std::vector<Point> pts;
    std::vector<double> w;
    for (std::size_t i = 0; i < s.count; ++i) {
      const double rho = std::tanh(beta(rng));
      pts.push_back(random_direction_point(s.dim, rho, rng));
      w.push_back(std::pow(1.0 - rho * rho, n));
    }
    AtomicMeasure m(s.dim, std::move(pts), std::move(w));
    out.push_back({static_cast<double>(k), std::move(m), nullptr});
  }
  return out;
}

std::vector<FamilyMember> file_family(const FamilySpec& s) {
  std::ifstream in(s.path);
  if (!in) throw ConfigError("family file not readable: " + s.path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("family file is not JSON: " + std::string(e.what()));
  }
  std::vector<FamilyMember> out;
  auto add = [&](const nlohmann::json& m) {
    AtomicMeasure mu = AtomicMeasure::from_json(m);
    if (mu.dim() != s.dim) throw ConfigError("family file: measure dimension differs from dim");
    const double param = depth_of(mu);
    out.push_back({param, std::move(mu), nullptr});
  };
  if (j.is_array()) {
    for (const auto& m : j) add(m);
  } else {
    add(j);
  }
  if (out.empty()) throw ConfigError("family file holds no measure");
  return out;
}

// ---------------------------------------------------------------- config

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x))
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  return x;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("config: '" + key + "' expects a nonnegative integer, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw ConfigError("config: '" + key + "' expects a comma-separated list");
  return out;
}

Experiment parse_experiment(const std::string& v) {
  for (const auto& [e, name] : kExperimentNames)
    if (name == v) return e;
  throw ConfigError("config: unknown experiment '" + v + "'");
}

FamilyKind parse_family(const std::string& v) {
  for (const auto& [k, name] : kFamilyNames)
    if (name == v) return k;
  throw ConfigError("config: unknown family '" + v + "'");
}

void require(bool ok, const std::string& hypothesis) {
  if (!ok) throw ConfigError("config violates hypothesis " + hypothesis);
}

HoloFunction poly_to_holo(const Polynomial& g) {
  HoloFunction f(1);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g[k] != cplx(0.0)) f.add_monomial(MultiIndex{static_cast<int>(k)}, g[k]);
  return f;
}

// ---------------------------------------------------------------- bands

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  if (m < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

BandSummary summarize(const std::string& pair, const std::vector<ReportRow>& rows, const ExperimentConfig& cfg,
                      bool with_slopes) {
  BandSummary b;
  b.pair = pair;
  b.min = std::numeric_limits<double>::infinity();
  b.max = -std::numeric_limits<double>::infinity();
  std::vector<double> x, la, lb;
  for (const ReportRow& r : rows) {
    if (r.pair != pair) continue;
    const std::string who = "member " + std::to_string(r.member) + " (param " + fmt(r.param) + ")";
    if (!std::isfinite(r.ratio) || !(r.ratio > 0.0)) {
      b.violations.push_back(who + ": ratio " + fmt(r.ratio) + " is not a positive number");
      continue;
    }
    b.min = std::min(b.min, r.ratio);
    b.max = std::max(b.max, r.ratio);
    if (cfg.band_min && r.ratio < *cfg.band_min)
      b.violations.push_back(who + ": ratio " + fmt(r.ratio) + " below band_min " + fmt(*cfg.band_min));
    if (cfg.band_max && r.ratio > *cfg.band_max)
      b.violations.push_back(who + ": ratio " + fmt(r.ratio) + " above band_max " + fmt(*cfg.band_max));
    if (r.a > 0.0 && r.b > 0.0) {
      x.push_back(r.param * std::log(2.0));
      la.push_back(std::log(r.a));
      lb.push_back(std::log(r.b));
    }
  }
  if (cfg.band_width && b.max / b.min > *cfg.band_width)
    b.violations.push_back("band width " + fmt(b.max / b.min) + " exceeds " + fmt(*cfg.band_width) +
                           " (min at one member, max at another)");
  if (with_slopes) {
    b.slope_a = ls_slope(x, la);
    b.slope_b = ls_slope(x, lb);
  }
  b.pass = b.violations.empty();
  return b;
}

// ---------------------------------------------------------------- experiments

struct Context {
  const ExperimentConfig& cfg;
  std::vector<FamilyMember> family;
  ExperimentReport& report;
};

CarlesonGrid carleson_grid(const ExperimentConfig& cfg) {
  CarlesonGrid g;
  g.directions = cfg.directions;
  g.seed = cfg.seed;
  return g;
}

ProbeSpec probe_spec(const ExperimentConfig& cfg) {
  ProbeSpec p;
  p.sphere_nodes = cfg.sphere_nodes;
  p.seed = cfg.seed;
  return p;
}

double s_value(const ExperimentConfig& c) { return c.s.value_or(1.0 + 1.0 / c.p - 1.0 / c.q); }

void run_thm11(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const bool hilbert = cfg.p == 2.0 && cfg.q == 2.0;
  const double s = s_value(cfg);
  const std::string pair = hilbert ? "opnorm/carleson" : "probe/carleson";
  for (std::size_t k = 0; k < ctx.family.size(); ++k) {
    const FamilyMember& m = ctx.family[k];
    const double a = hilbert ? op_norm_h2(m.measure)
                             : opnorm_probe_hp_hq(m.measure, cfg.p, cfg.q, probe_spec(cfg)).lower_bound;
    const double b = carleson_box(m.measure, s, carleson_grid(cfg)).value;
    ctx.report.rows.push_back({k, m.param, pair, a, b, a / b, ""});
  }
  ctx.report.bands.push_back(summarize(pair, ctx.report.rows, cfg, false));
}

void run_thm12(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double r = cfg.r.value_or(cfg.p * cfg.q / (cfg.p - cfg.q));
  const auto nodes = sample_sphere(cfg.family.dim, cfg.sphere_nodes, cfg.seed);
  const std::string pair = "probe/tilde_mu";
  for (std::size_t k = 0; k < ctx.family.size(); ++k) {
    const FamilyMember& m = ctx.family[k];
    const double a = opnorm_probe_hp_hq(m.measure, cfg.p, cfg.q, probe_spec(cfg)).lower_bound;
    const double b = tilde_mu_lr_norm(m.measure, r, nodes, cfg.gamma).value;
    ctx.report.rows.push_back({k, m.param, pair, a, b, a / b, ""});
  }
  ctx.report.bands.push_back(summarize(pair, ctx.report.rows, cfg, true));
}

std::shared_ptr<const Lattice> covering_lattice(const ExperimentConfig& cfg, const FamilyMember& m) {
  if (m.lattice) return m.lattice;
  LatticeSpec ls;
  ls.dim = cfg.family.dim;
  ls.r = cfg.family.lattice_r;
  ls.candidate_density = lattice_density(cfg.family.dim);
  ls.seed = cfg.seed;
  ls.focus = m.measure.merged().points();
  return std::make_shared<const Lattice>(build_lattice(ls));
}

void run_thm62(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double t = cfg.t.value_or(static_cast<double>(cfg.family.dim));
  StNormSpec st;
  st.quadrature.samples_per_component = cfg.quad_samples;
  st.quadrature.seed = cfg.seed;
  for (std::size_t k = 0; k < ctx.family.size(); ++k) {
    const FamilyMember& m = ctx.family[k];
    const SpectrumResult spec = gram_spectrum(m.measure);
    const double sp = std::pow(schatten_norm(spec, cfg.p), cfg.p);
    const double ls = lattice_sum(m.measure, *covering_lattice(cfg, m), cfg.p);
    const StNorm stn = st_lambda_norm(m.measure, t, cfg.p, st);
    const double stp = stn.pth_power;
    auto row = [&](const std::string& pair, double a, double b) {
      ctx.report.rows.push_back({k, m.param, pair, a, b, a / b, stn.decaying ? "" : "st_tail_not_decaying"});
    };
    row("schatten/lattice", sp, ls);
    row("schatten/st", sp, stp);
    row("lattice/st", ls, stp);
    double trace = 0.0;
    const double n = static_cast<double>(m.measure.dim());
    for (std::size_t j = 0; j < spec.points.size(); ++j)
      trace += spec.weights[j] * std::pow(1.0 - spec.points[j].norm_sq(), -n);
    const double s1 = schatten_norm(spec, 1.0);
    const bool exact = std::abs(s1 - trace) <= 1e-10 * trace;
    ctx.report.rows.push_back({k, m.param, "S1/trace", s1, trace, s1 / trace, exact ? "exact" : "mismatch"});
  }
  for (const char* pair : {"schatten/lattice", "schatten/st", "lattice/st"})
    ctx.report.bands.push_back(summarize(pair, ctx.report.rows, cfg, false));
  BandSummary s1;
  s1.pair = "S1/trace";
  s1.min = std::numeric_limits<double>::infinity();
  s1.max = -std::numeric_limits<double>::infinity();
  for (const ReportRow& r : ctx.report.rows) {
    if (r.pair != "S1/trace") continue;
    s1.min = std::min(s1.min, r.ratio);
    s1.max = std::max(s1.max, r.ratio);
    if (r.flag != "exact")
      s1.violations.push_back("member " + std::to_string(r.member) + ": S_1 norm differs from the trace by more than 1e-10");
  }
  s1.pass = s1.violations.empty();
  ctx.report.bands.push_back(std::move(s1));
}

std::vector<BoundaryPoint> profile_directions(const ExperimentConfig& cfg, const AtomicMeasure& mu) {
  auto zetas = boundary_grid(cfg.family.dim, cfg.directions, cfg.seed);
  for (const Point& z : mu.points())
    if (z.norm_sq() > 0.0) zetas.push_back(BoundaryPoint::normalized(z.coords()));
  return zetas;
}

double tail_lambda(const AtomicMeasure& mu, double threshold) {
  std::vector<Point> pts;
  std::vector<double> w;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (mu.points()[j].norm() <= threshold) continue;
    pts.push_back(mu.points()[j]);
    w.push_back(mu.weights()[j]);
  }
  if (pts.empty()) return 0.0;
  return op_norm_h2(AtomicMeasure(mu.dim(), std::move(pts), std::move(w)));
}

void run_sec5(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double s = cfg.s.value_or(1.0);
  std::vector<ProfilePoint> surrogate;
  bool last_profile_vanishing = true;
  for (std::size_t k = 0; k < ctx.family.size(); ++k) {
    const FamilyMember& m = ctx.family[k];
    const double depth = depth_of(m.measure);
    const auto levels = std::max<std::size_t>(static_cast<std::size_t>(std::ceil(depth)) + 1, 8);
    const auto deltas = delta_ladder(levels);
    const auto zetas = profile_directions(cfg, m.measure);
    const auto profile = vanishing_profile(m.measure, s, deltas, zetas);
    const bool vanishing = vanishing_flag(profile);
    double sup = 0.0;
    for (const ProfilePoint& p : profile) sup = std::max(sup, p.value);
    const double cut = 1.0 - std::ldexp(1.0, -static_cast<int>(std::ceil(depth / 2.0)));
    const double tail = tail_lambda(m.measure, cut);
    surrogate.push_back({std::ldexp(1.0, -static_cast<int>(k)), tail});
    ctx.report.rows.push_back(
        {k, m.param, "profile/tail_lambda1", sup, tail, tail > 0.0 ? sup / tail : 0.0,
         vanishing ? "vanishing" : "non-vanishing"});
    last_profile_vanishing = vanishing;
  }
  const bool surrogate_vanishing = vanishing_flag(surrogate);
  ctx.report.notes.push_back(std::string("profile flag (deepest member): ") +
                             (last_profile_vanishing ? "vanishing" : "non-vanishing"));
  ctx.report.notes.push_back(std::string("tail lambda_1 flag along the family: ") +
                             (surrogate_vanishing ? "vanishing" : "non-vanishing"));
  BandSummary b;
  b.pair = "profile/tail_lambda1";
  for (const ReportRow& r : ctx.report.rows) {
    if (!(r.ratio > 0.0)) continue;
    b.min = b.min > 0.0 ? std::min(b.min, r.ratio) : r.ratio;
    b.max = std::max(b.max, r.ratio);
  }
  if (surrogate_vanishing != last_profile_vanishing)
    b.violations.push_back("member " + std::to_string(ctx.family.size() - 1) +
                           ": profile flag disagrees with the tail lambda_1 behavior");
  b.pass = b.violations.empty();
  ctx.report.bands.push_back(std::move(b));
}

std::string divergence_flag(const IntegralReport& a, const IntegralReport& b) {
  return std::string(a.divergent ? "A_divergent" : "A_convergent") + (b.divergent ? "|B_divergent" : "|B_convergent");
}

void run_sec7_wcomp(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double t = cfg.t.value_or(criterion_default_t(1, cfg.p));
  CriterionSpec spec;
  spec.grid_size = cfg.grid_size;
  spec.outer.seed = cfg.seed;
  spec.st.quadrature.seed = cfg.seed;
  QuadratureSpec outer;
  outer.samples_per_component = cfg.quad_samples;
  outer.seed = cfg.seed;
  for (std::size_t k = 0; k < cfg.a_values.size(); ++k) {
    const double a = cfg.a_values[k];
    const Polynomial phi{0.0, a};
    const IntegralReport ik = nevanlinna_kernel_integral(phi, cfg.p, t, spec);
    const IntegralReport in = nevanlinna_criterion_integral(phi, cfg.p, outer);
    ctx.report.rows.push_back({k, a, "nevanlinna_kernel/nevanlinna", ik.value, in.value, ik.value / in.value,
                               divergence_flag(ik, in)});
    const DiskMap map(phi, HoloFunction::constant(1, 1.0));
    const IntegralReport ic = schatten_criterion_integral(WcompSource{map}, cfg.p, t, spec);
    const double sp = std::pow(schatten_norm(pullback_measure(map, cfg.grid_size), cfg.p / 2.0), cfg.p / 2.0);
    ctx.report.rows.push_back(
        {k, a, "criterion/schatten", ic.value, sp, ic.value / sp, ic.divergent ? "A_divergent" : "A_convergent"});
  }
  for (const char* pair : {"nevanlinna_kernel/nevanlinna", "criterion/schatten"})
    ctx.report.bands.push_back(summarize(pair, ctx.report.rows, cfg, false));
}

void run_sec7_volterra(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const HoloFunction g = poly_to_holo(cfg.g);
  CriterionSpec spec;
  spec.outer.seed = cfg.seed;
  QuadratureSpec bq;
  bq.samples_per_component = std::max<std::size_t>(cfg.quad_samples, 1);
  bq.seed = cfg.seed;
  BandSummary b;
  b.pair = "criterion/besov";
  b.min = std::numeric_limits<double>::infinity();
  b.max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cfg.p_values.size(); ++k) {
    const double p = cfg.p_values[k];
    const double t = cfg.t.value_or(criterion_default_t(1, p));
    const IntegralReport crit = schatten_criterion_integral(VolterraSource{g}, p, t, spec);
    const IntegralReport bes = besov_seminorm(g, p, bq);
    const double ratio = crit.value / bes.value;
    ctx.report.rows.push_back({k, p, "criterion/besov", crit.value, bes.value, ratio, divergence_flag(crit, bes)});
    const bool expect_divergent = p <= 1.0;
    if (crit.divergent != expect_divergent || bes.divergent != expect_divergent)
      b.violations.push_back("member " + std::to_string(k) + " (p = " + fmt(p) + "): expected " +
                             (expect_divergent ? "divergence" : "convergence") + ", got " +
                             divergence_flag(crit, bes));
    if (!expect_divergent && std::isfinite(ratio)) {
      b.min = std::min(b.min, ratio);
      b.max = std::max(b.max, ratio);
    }
  }
  b.pass = b.violations.empty();
  ctx.report.bands.push_back(std::move(b));
}

}  // namespace

std::string_view experiment_name(Experiment e) {
  for (const auto& [exp, name] : kExperimentNames)
    if (exp == e) return name;
  return "?";
}

std::vector<FamilyMember> generate_family(const FamilySpec& spec) {
  if (spec.dim == 0 || spec.dim > 2) throw ConfigError("family: dim must be 1 or 2");
  if (spec.kind != FamilyKind::from_file && spec.members == 0) throw ConfigError("family: members must be positive");
  switch (spec.kind) {
    case FamilyKind::boundary_accumulation:
      if (!(spec.rate > 0.0)) throw ConfigError("family: rate must be positive");
      return boundary_family(spec);
    case FamilyKind::lattice_uniform:
      return lattice_family(spec);
    case FamilyKind::random_cloud:
      if (!(spec.cloud_radius > 0.0 && spec.cloud_radius < 1.0)) throw ConfigError("family: cloud_radius in (0, 1)");
      return cloud_family(spec);
    case FamilyKind::from_file:
      return file_family(spec);
  }
  return {};
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string v = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || v.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    if (!seen.insert(key).second) throw ConfigError("config: duplicate key '" + key + "'");

    FamilySpec& f = c.family;
    if (key == "experiment") c.experiment = parse_experiment(v);
    else if (key == "dim") f.dim = parse_uint(key, v);
    else if (key == "family") f.kind = parse_family(v);
    else if (key == "members") f.members = parse_uint(key, v);
    else if (key == "rate") f.rate = parse_double(key, v);
    else if (key == "base_atoms") f.base_atoms = parse_uint(key, v);
    else if (key == "lattice_r") f.lattice_r = parse_double(key, v);
    else if (key == "lattice_cover") f.lattice_cover = parse_double(key, v);
    else if (key == "weight_exponent") f.weight_exponent = parse_double(key, v);
    else if (key == "count") f.count = parse_uint(key, v);
    else if (key == "cloud_radius") f.cloud_radius = parse_double(key, v);
    else if (key == "path") f.path = v;
    else if (key == "p") c.p = parse_double(key, v);
    else if (key == "q") c.q = parse_double(key, v);
    else if (key == "s") c.s = parse_double(key, v);
    else if (key == "t") c.t = parse_double(key, v);
    else if (key == "r") c.r = parse_double(key, v);
    else if (key == "gamma") c.gamma = parse_double(key, v);
    else if (key == "seed") c.seed = f.seed = parse_uint(key, v);
    else if (key == "sphere_nodes") c.sphere_nodes = parse_uint(key, v);
    else if (key == "quad_samples") c.quad_samples = parse_uint(key, v);
    else if (key == "directions") c.directions = parse_uint(key, v);
    else if (key == "band_min") c.band_min = parse_double(key, v);
    else if (key == "band_max") c.band_max = parse_double(key, v);
    else if (key == "band_width") c.band_width = parse_double(key, v);
    else if (key == "test_mode") c.test_mode = parse_bool(key, v);
    else if (key == "out_csv") c.out_csv = v;
    else if (key == "out_json") c.out_json = v;
    else if (key == "a_values") c.a_values = parse_list(key, v);
    else if (key == "p_values") c.p_values = parse_list(key, v);
    else if (key == "g") {
      c.g.clear();
      for (double x : parse_list(key, v)) c.g.emplace_back(x);
    } else if (key == "grid_size") c.grid_size = parse_uint(key, v);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  if (!seen.contains("experiment")) throw ConfigError("config: missing key 'experiment'");
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not readable: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig c = parse(ss.str());
  if (c.family.kind == FamilyKind::from_file && c.family.path.is_relative())
    c.family.path = path.parent_path() / c.family.path;
  return c;
}

void ExperimentConfig::validate() const {
  const std::size_t n = family.dim;
  require(n == 1 || n == 2, "dim in {1, 2}");
  require(p > 0.0, "p > 0");
  require(q > 0.0, "q > 0");
  require(gamma > 1.0, "gamma > 1");
  require(sphere_nodes >= 16 && quad_samples >= 16 && directions >= 1, "sampler sizes (sphere_nodes, quad_samples >= 16)");
  if (band_width) require(*band_width >= 1.0, "band_width >= 1");
  if (band_min && band_max) require(*band_min <= *band_max, "band_min <= band_max");
  if (family.kind == FamilyKind::lattice_uniform)
    require(family.lattice_r > 0.0 && family.lattice_r < 1.0 && family.lattice_cover > 0.0 &&
                family.lattice_cover < 1.0,
            "lattice_r, lattice_cover in (0, 1)");
  if (family.kind == FamilyKind::from_file) require(!family.path.empty(), "from_file needs path");

  switch (experiment) {
    case Experiment::thm11_band: {
      require(p <= q, "p <= q");
      if (s) require(std::abs(*s - (1.0 + 1.0 / p - 1.0 / q)) <= 1e-12, "s = 1 + 1/p - 1/q");
      if (!(p == 2.0 && q == 2.0)) require(p > 1.0, "p > 1 (probe lower bounds)");
      break;
    }
    case Experiment::thm12_band: {
      require(q < p, "q < p");
      require(q > 1.0, "q > 1 (probe lower bounds)");
      if (r) require(std::abs(*r - p * q / (p - q)) <= 1e-12 * (p * q / (p - q)), "r = pq/(p - q)");
      break;
    }
    case Experiment::thm62_band: {
      const double tv = t.value_or(static_cast<double>(n));
      require(tv > t_threshold(n, p), "t > t_p (t_p = max(n/p - n, 0) = " + fmt(t_threshold(n, p)) + ")");
      break;
    }
    case Experiment::sec5_profile:
      if (s) require(*s > 0.0, "s > 0");
      break;
    case Experiment::sec7_wcomp: {
      require(n == 1, "dim = 1 (disk applications)");
      if (t) require(*t > t_threshold(1, p / 2.0), "t > t_p with p/2 in place of p");
      for (double a : a_values) require(a > 0.0 && a <= 0.98, "0 < a <= 0.98 for phi = a z");
      require(grid_size >= 16, "grid_size >= 16");
      break;
    }
    case Experiment::sec7_volterra: {
      require(n == 1, "dim = 1 (disk applications)");
      for (double pv : p_values) {
        require(pv > 0.0, "p > 0 in p_values");
        if (t) require(*t > t_threshold(1, pv / 2.0), "t > t_p with p/2 in place of p");
      }
      require(g.size() >= 2 && std::any_of(g.begin() + 1, g.end(), [](cplx c) { return c != cplx(0.0); }),
              "g nonconstant");
      break;
    }
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment_name(experiment);
  j["dim"] = family.dim;
  j["family"] = family_name(family.kind);
  j["members"] = family.members;
  j["rate"] = family.rate;
  j["base_atoms"] = family.base_atoms;
  j["lattice_r"] = family.lattice_r;
  j["lattice_cover"] = family.lattice_cover;
  j["weight_exponent"] = family.weight_exponent;
  j["count"] = family.count;
  j["cloud_radius"] = family.cloud_radius;
  j["path"] = family.path.string();
  j["p"] = p;
  j["q"] = q;
  if (s) j["s"] = *s;
  if (t) j["t"] = *t;
  if (r) j["r"] = *r;
  j["gamma"] = gamma;
  j["seed"] = seed;
  j["sphere_nodes"] = sphere_nodes;
  j["quad_samples"] = quad_samples;
  j["directions"] = directions;
  if (band_min) j["band_min"] = *band_min;
  if (band_max) j["band_max"] = *band_max;
  if (band_width) j["band_width"] = *band_width;
  j["test_mode"] = test_mode;
  j["a_values"] = a_values;
  j["p_values"] = p_values;
  std::vector<double> gre;
  for (cplx c : g) gre.push_back(c.real());
  j["g"] = gre;
  j["grid_size"] = grid_size;
  return j;
}

std::string ExperimentReport::csv_header() {
  return "schema,experiment,member,label,param,pair,quantity_a,quantity_b,ratio,flag";
}

std::string ExperimentReport::to_csv() const {
  std::string out = csv_header() + "\n";
  const std::string exp(experiment_name(experiment));
  const std::string label = config.value("family", std::string());
  for (const ReportRow& r : rows) {
    out += std::to_string(kReportSchemaVersion) + "," + exp + "," + std::to_string(r.member) + "," + label + "," +
           fmt(r.param) + "," + r.pair + "," + fmt(r.a) + "," + fmt(r.b) + "," + fmt(r.ratio) + "," + r.flag + "\n";
  }
  return out;
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["experiment"] = experiment_name(experiment);
  j["config"] = config;
  nlohmann::json rs = nlohmann::json::array();
  for (const ReportRow& r : rows)
    rs.push_back({{"member", r.member}, {"param", r.param}, {"pair", r.pair}, {"quantity_a", r.a},
                  {"quantity_b", r.b}, {"ratio", r.ratio}, {"flag", r.flag}});
  j["rows"] = rs;
  nlohmann::json bs = nlohmann::json::array();
  for (const BandSummary& b : bands)
    bs.push_back({{"pair", b.pair}, {"min", b.min}, {"max", b.max}, {"slope_a", b.slope_a}, {"slope_b", b.slope_b},
                  {"pass", b.pass}, {"violations", b.violations}});
  j["bands"] = bs;
  j["notes"] = notes;
  j["passed"] = passed;
  j["stamp"] = {{"seed", config.value("seed", std::uint64_t{0})}, {"version", library_version()}};
  return j;
}

ExperimentReport run(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  report.experiment = config.experiment;
  report.config = config.to_json();
  const bool needs_family =
      config.experiment != Experiment::sec7_wcomp && config.experiment != Experiment::sec7_volterra;
  Context ctx{config, needs_family ? generate_family(config.family) : std::vector<FamilyMember>{}, report};
  switch (config.experiment) {
    case Experiment::thm11_band: run_thm11(ctx); break;
    case Experiment::thm12_band: run_thm12(ctx); break;
    case Experiment::thm62_band: run_thm62(ctx); break;
    case Experiment::sec5_profile: run_sec5(ctx); break;
    case Experiment::sec7_wcomp: run_sec7_wcomp(ctx); break;
    case Experiment::sec7_volterra: run_sec7_volterra(ctx); break;
  }
  report.passed = std::all_of(report.bands.begin(), report.bands.end(), [](const BandSummary& b) { return b.pass; });
  return report;
}

}  // namespace qmu

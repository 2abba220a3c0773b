// Command-line front end: single-measure diagnostics and the experiment runner.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <Eigen/SVD>

#include "qmu/disk.hpp"
#include "qmu/errors.hpp"
#include "qmu/lattice.hpp"
#include "qmu/measure.hpp"
#include "qmu/runner.hpp"
#include "qmu/spectral.hpp"
#include "qmu/tent.hpp"

namespace {

using namespace qmu;
using nlohmann::json;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

void emit_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Polynomial parse_poly(const std::vector<double>& coeffs) { return Polynomial(coeffs.begin(), coeffs.end()); }

HoloFunction poly_holo(const Polynomial& g) {
  HoloFunction f(1);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g[k] != cplx(0.0)) f.add_monomial(MultiIndex{static_cast<int>(k)}, g[k]);
  return f;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_csv;
  std::string out_json;
};

void add_common(CLI::App* app, Common& c, bool with_config) {
  if (with_config) app->add_option("--config", c.config, "Experiment config file (key = value)")->required();
  app->add_option("--seed", c.seed, "Seed for all samplers");
  app->add_option("--out-csv", c.out_csv, "CSV output path");
  app->add_option("--out-json", c.out_json, "JSON output path ('-' or empty for stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toeplitz-type operators on Hardy spaces of the ball: numerics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(library_version()));

  // spectrum
  Common spec_c;
  std::string spec_measure;
  auto* spec_cmd = app.add_subcommand("spectrum", "Eigenvalues of Q_mu for an atomic measure");
  spec_cmd->add_option("measure", spec_measure, "Measure JSON file")->required();
  add_common(spec_cmd, spec_c, false);

  // carleson
  Common car_c;
  std::string car_measure, car_method = "box";
  double car_s = 1.0, car_t = 1.0;
  std::size_t car_dirs = 64, car_ref = 3;
  auto* car_cmd = app.add_subcommand("carleson", "Carleson constant of an atomic measure");
  car_cmd->add_option("measure", car_measure, "Measure JSON file")->required();
  car_cmd->add_option("--s", car_s, "Carleson exponent s");
  car_cmd->add_option("--method", car_method, "box or kernel")->check(CLI::IsMember({"box", "kernel"}));
  car_cmd->add_option("--t", car_t, "Kernel exponent t (kernel method)");
  car_cmd->add_option("--directions", car_dirs, "Boundary directions at the coarsest level");
  car_cmd->add_option("--refinements", car_ref, "Grid doublings in the refinement trace");
  add_common(car_cmd, car_c, false);

  // schatten-check
  Common sch_c;
  std::string sch_measure;
  double sch_p = 1.0;
  std::optional<double> sch_t;
  std::size_t sch_samples = 256;
  double sch_r = 0.6;
  auto* sch_cmd = app.add_subcommand("schatten-check", "Schatten norm against lattice sum and S_t mu norm");
  sch_cmd->add_option("measure", sch_measure, "Measure JSON file")->required();
  sch_cmd->add_option("--p", sch_p, "Schatten exponent p > 0");
  sch_cmd->add_option("--t", sch_t, "Berezin exponent t > t_p (default n, or 2n when n <= t_p)");
  sch_cmd->add_option("--quad-samples", sch_samples, "Samples per quadrature component");
  sch_cmd->add_option("--lattice-r", sch_r, "Bergman radius of the covering lattice");
  add_common(sch_cmd, sch_c, false);

  // boundedness-check
  Common bnd_c;
  std::string bnd_measure;
  double bnd_p = 2.0, bnd_q = 2.0, bnd_gamma = kDefaultAperture;
  std::size_t bnd_nodes = 4096;
  auto* bnd_cmd = app.add_subcommand("boundedness-check", "Probe lower bound for H^p -> H^q against the Carleson-side quantity");
  bnd_cmd->add_option("measure", bnd_measure, "Measure JSON file")->required();
  bnd_cmd->add_option("--p", bnd_p, "Source exponent p > 1");
  bnd_cmd->add_option("--q", bnd_q, "Target exponent q > 1");
  bnd_cmd->add_option("--gamma", bnd_gamma, "Aperture of the approach regions (q < p)");
  bnd_cmd->add_option("--sphere-nodes", bnd_nodes, "Sphere nodes for Hardy norms");
  add_common(bnd_cmd, bnd_c, false);

  // compactness-profile
  Common cmp_c;
  std::string cmp_measure;
  double cmp_s = 1.0;
  std::size_t cmp_levels = 12, cmp_dirs = 64;
  auto* cmp_cmd = app.add_subcommand("compactness-profile", "Vanishing Carleson profile and top eigenvalues");
  cmp_cmd->add_option("measure", cmp_measure, "Measure JSON file")->required();
  cmp_cmd->add_option("--s", cmp_s, "Carleson exponent s");
  cmp_cmd->add_option("--levels", cmp_levels, "Levels of the delta ladder 2^{1-j}");
  cmp_cmd->add_option("--directions", cmp_dirs, "Boundary directions");
  add_common(cmp_cmd, cmp_c, false);

  // tent
  Common tent_c;
  std::string tent_seq, tent_lattice;
  double tent_p = 2.0, tent_q = 2.0, tent_gamma = kDefaultAperture;
  std::size_t tent_nodes = 512;
  auto* tent_cmd = app.add_subcommand("tent", "Tent-space norm of a sequence on a lattice");
  tent_cmd->add_option("sequence", tent_seq, "Sequence JSON file ([[re, im], ...])")->required();
  tent_cmd->add_option("--lattice", tent_lattice, "Lattice JSON file")->required();
  tent_cmd->add_option("--p", tent_p, "Outer exponent p");
  tent_cmd->add_option("--q", tent_q, "Inner exponent q (inf for the supremum)");
  tent_cmd->add_option("--gamma", tent_gamma, "Aperture");
  tent_cmd->add_option("--sphere-nodes", tent_nodes, "Sphere nodes");
  add_common(tent_cmd, tent_c, false);

  // apps
  Common apps_c;
  std::string apps_mode, apps_map;
  std::vector<double> apps_phi{0.0, 0.5}, apps_g{0.0, 1.0}, apps_w{0.1, 0.0};
  std::size_t apps_n = 64;
  double apps_p = 2.0;
  auto* apps_cmd = app.add_subcommand("apps", "Disk applications: wcomp, volterra, nevanlinna");
  apps_cmd->add_option("mode", apps_mode, "wcomp, volterra or nevanlinna")
      ->required()
      ->check(CLI::IsMember({"wcomp", "volterra", "nevanlinna"}));
  apps_cmd->add_option("--map", apps_map, "DiskMap JSON file (wcomp)");
  apps_cmd->add_option("--phi", apps_phi, "Coefficients of phi (wcomp without --map, nevanlinna)")->delimiter(',');
  apps_cmd->add_option("--g", apps_g, "Coefficients of g (volterra)")->delimiter(',');
  apps_cmd->add_option("--w", apps_w, "Point w as re,im (nevanlinna)")->delimiter(',');
  apps_cmd->add_option("--n", apps_n, "Section size (wcomp)");
  apps_cmd->add_option("--p", apps_p, "Schatten exponent (wcomp, volterra)");
  add_common(apps_cmd, apps_c, false);

  // run
  Common run_c;
  bool run_test = false;
  auto* run_cmd = app.add_subcommand("run", "Run a band experiment from a config file");
  run_cmd->add_flag("--test-mode", run_test, "Exit 1 when a band is violated");
  add_common(run_cmd, run_c, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*spec_cmd) {
      const auto mu = AtomicMeasure::from_json(read_json(spec_measure));
      emit_json(spec_c.out_json, gram_spectrum(mu).to_json());
    } else if (*car_cmd) {
      const auto mu = AtomicMeasure::from_json(read_json(car_measure));
      CarlesonGrid grid;
      grid.directions = car_dirs;
      grid.refinements = car_ref;
      if (car_c.seed) grid.seed = *car_c.seed;
      const auto method = car_method == "box" ? CarlesonMethod::box : CarlesonMethod::kernel;
      const CarlesonReport r = carleson_constant(mu, car_s, method, car_t, grid);
      if (!car_c.out_csv.empty()) write_text(car_c.out_csv, CarlesonReport::csv_header() + "\n" + r.csv_row() + "\n");
      emit_json(car_c.out_json, r.to_json());
    } else if (*sch_cmd) {
      const auto mu = AtomicMeasure::from_json(read_json(sch_measure));
      const double n = static_cast<double>(mu.dim());
      const double t = sch_t.value_or(n > t_threshold(mu.dim(), sch_p) ? n : 2.0 * n);
      const std::uint64_t seed = sch_c.seed.value_or(1);
      LatticeSpec ls;
      ls.dim = mu.dim();
      ls.r = sch_r;
      ls.candidate_density = mu.dim() == 1 ? 6 : 2;
      ls.seed = seed;
      ls.focus = mu.merged().points();
      const Lattice lattice = build_lattice(ls);
      StNormSpec st;
      st.quadrature.samples_per_component = sch_samples;
      st.quadrature.seed = seed;
      const SpectrumResult spec = gram_spectrum(mu);
      const StNorm stn = st_lambda_norm(mu, t, sch_p, st);
      json j{{"p", sch_p},
             {"t", t},
             {"schatten_norm", schatten_norm(spec, sch_p)},
             {"schatten_pth_power", std::pow(schatten_norm(spec, sch_p), sch_p)},
             {"trace", spec.trace},
             {"lattice_sum", lattice_sum(mu, lattice, sch_p)},
             {"lattice_size", lattice.size()},
             {"st_norm", stn.value},
             {"st_pth_power", stn.pth_power},
             {"st_std_error", stn.std_error},
             {"st_decaying", stn.decaying},
             {"st_warnings", stn.warnings}};
      emit_json(sch_c.out_json, j);
    } else if (*bnd_cmd) {
      const auto mu = AtomicMeasure::from_json(read_json(bnd_measure));
      ProbeSpec ps;
      ps.sphere_nodes = bnd_nodes;
      ps.seed = bnd_c.seed.value_or(1);
      const ProbeResult probe = opnorm_probe_hp_hq(mu, bnd_p, bnd_q, ps);
      json j{{"p", bnd_p}, {"q", bnd_q}, {"probe_lower_bound", probe.lower_bound}, {"best_probe", probe.best_probe}};
      if (bnd_p <= bnd_q) {
        const double s = 1.0 + 1.0 / bnd_p - 1.0 / bnd_q;
        CarlesonGrid grid;
        grid.seed = ps.seed;
        j["s"] = s;
        j["carleson_box"] = carleson_box(mu, s, grid).value;
      } else {
        const double r = bnd_p * bnd_q / (bnd_p - bnd_q);
        const auto nodes = sample_sphere(mu.dim(), bnd_nodes, ps.seed);
        j["r"] = r;
        j["tilde_mu_lr_norm"] = tilde_mu_lr_norm(mu, r, nodes, bnd_gamma).value;
      }
      emit_json(bnd_c.out_json, j);
    } else if (*cmp_cmd) {
      const auto mu = AtomicMeasure::from_json(read_json(cmp_measure));
      auto zetas = boundary_grid(mu.dim(), cmp_dirs, cmp_c.seed.value_or(1));
      for (const Point& z : mu.points())
        if (z.norm_sq() > 0.0) zetas.push_back(BoundaryPoint::normalized(z.coords()));
      const auto deltas = delta_ladder(cmp_levels);
      const auto profile = vanishing_profile(mu, cmp_s, deltas, zetas);
      json pj = json::array();
      std::string csv = "delta,value\n";
      for (const ProfilePoint& p : profile) {
        pj.push_back({{"delta", p.delta}, {"value", p.value}});
        csv += fmt(p.delta) + "," + fmt(p.value) + "\n";
      }
      const SpectrumResult spec = gram_spectrum(mu);
      std::vector<double> top(spec.eigenvalues.begin(),
                              spec.eigenvalues.begin() + std::min<std::size_t>(10, spec.eigenvalues.size()));
      if (!cmp_c.out_csv.empty()) write_text(cmp_c.out_csv, csv);
      emit_json(cmp_c.out_json, {{"s", cmp_s}, {"profile", pj}, {"vanishing", vanishing_flag(profile)}, {"top_eigenvalues", top}});
    } else if (*tent_cmd) {
      const auto seq = TentSequence::from_json(read_json(tent_seq));
      const auto lattice = Lattice::from_json(read_json(tent_lattice));
      const auto nodes = sample_sphere(lattice.dim(), tent_nodes, tent_c.seed.value_or(1));
      const TentNorm t = tent_norm(seq, lattice, tent_p, tent_q, nodes, tent_gamma);
      emit_json(tent_c.out_json, {{"p", tent_p}, {"q", std::isinf(tent_q) ? json("inf") : json(tent_q)},
                                  {"value", t.value}, {"empty_nodes", t.empty_nodes}, {"warnings", t.warnings}});
    } else if (*apps_cmd) {
      if (apps_mode == "wcomp") {
        const DiskMap map = apps_map.empty() ? DiskMap(parse_poly(apps_phi), HoloFunction::constant(1, 1.0))
                                             : DiskMap::from_json(read_json(apps_map));
        const Eigen::MatrixXcd w = wcomp_matrix(map, apps_n);
        const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(w);
        std::vector<double> sv(svd.singularValues().data(), svd.singularValues().data() + svd.singularValues().size());
        const double t = criterion_default_t(1, apps_p);
        const IntegralReport crit = schatten_criterion_integral(WcompSource{map}, apps_p, t);
        emit_json(apps_c.out_json, {{"map", map.to_json()}, {"section_size", apps_n}, {"singular_values", sv},
                                    {"p", apps_p}, {"t", t}, {"criterion", crit.to_json()}});
      } else if (apps_mode == "volterra") {
        const HoloFunction g = poly_holo(parse_poly(apps_g));
        const double t = criterion_default_t(1, apps_p);
        QuadratureSpec q;
        q.seed = apps_c.seed.value_or(1);
        emit_json(apps_c.out_json, {{"p", apps_p}, {"t", t},
                                    {"criterion", schatten_criterion_integral(VolterraSource{g}, apps_p, t).to_json()},
                                    {"besov", besov_seminorm(g, apps_p, q).to_json()}});
      } else {
        if (apps_w.size() != 2) throw InputError("--w expects re,im");
        const double v = nevanlinna(parse_poly(apps_phi), cplx(apps_w[0], apps_w[1]));
        emit_json(apps_c.out_json, {{"w", apps_w}, {"nevanlinna", v}});
      }
    } else if (*run_cmd) {
      ExperimentConfig cfg = ExperimentConfig::load(run_c.config);
      if (run_c.seed) cfg.seed = cfg.family.seed = *run_c.seed;
      if (!run_c.out_csv.empty()) cfg.out_csv = run_c.out_csv;
      if (!run_c.out_json.empty()) cfg.out_json = run_c.out_json;
      cfg.test_mode = cfg.test_mode || run_test;
      const ExperimentReport report = run(cfg);
      if (!cfg.out_csv.empty()) write_text(cfg.out_csv, report.to_csv());
      if (!cfg.out_json.empty()) write_text(cfg.out_json, report.to_json().dump(2) + "\n");
      if (cfg.out_csv.empty() && cfg.out_json.empty()) std::cout << report.to_csv();
      for (const BandSummary& b : report.bands) {
        std::cerr << b.pair << ": [" << fmt(b.min) << ", " << fmt(b.max) << "] " << (b.pass ? "pass" : "FAIL") << "\n";
        for (const std::string& v : b.violations) std::cerr << "  " << v << "\n";
      }
      for (const std::string& n : report.notes) std::cerr << n << "\n";
      if (cfg.test_mode && !report.passed) return 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "qmu/errors.hpp"
#include "qmu/runner.hpp"

using namespace qmu;

namespace {

std::string config_error(const std::string& text) {
  try {
    (void)ExperimentConfig::parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("qmu_runner_" + name);
}

}  // namespace

TEST_SUITE("runner") {
  TEST_CASE("boundary accumulation masses") {
    FamilySpec s;
    s.kind = FamilyKind::boundary_accumulation;
    s.dim = 1;
    s.rate = 1.0;
    s.members = 1;
    s.base_atoms = 5;
    const auto fam = generate_family(s);
    REQUIRE(fam.size() == 1);
    const AtomicMeasure& m = fam[0].measure;
    REQUIRE(m.size() == 5);
    for (std::size_t j = 0; j < 5; ++j) {
      const double gap = std::ldexp(1.0, -static_cast<int>(j + 1));
      CHECK(m.points()[j][0] == cplx(1.0 - gap));
      CHECK(m.weights()[j] == gap);
    }
    CHECK(fam[0].param == 5.0);

    s.dim = 2;
    s.rate = 0.5;
    s.members = 3;
    const auto fam2 = generate_family(s);
    REQUIRE(fam2.size() == 3);
    CHECK(fam2[2].measure.size() == 7);
    CHECK(fam2[2].measure.weights()[0] == doctest::Approx(0.5));  // (2^-1)^{2 * 0.5}
  }

  TEST_CASE("lattice family members are nested radius quantiles") {
    FamilySpec s;
    s.kind = FamilyKind::lattice_uniform;
    s.dim = 1;
    s.members = 8;
    s.lattice_cover = 0.9;
    const auto fam = generate_family(s);
    REQUIRE(fam.size() == 8);
    REQUIRE(fam[0].lattice);
    // centers sharing a radius enter together, so sizes may repeat
    for (std::size_t k = 1; k < fam.size(); ++k) CHECK(fam[k].measure.size() >= fam[k - 1].measure.size());
    CHECK(fam.front().measure.size() < fam.back().measure.size());
    CHECK(fam.front().measure.size() >= fam.back().measure.size() / 8);
    CHECK(fam.back().measure.size() == fam.back().lattice->size());
    for (std::size_t j = 0; j < fam.back().measure.size(); ++j) {
      const double r2 = fam.back().measure.points()[j].norm_sq();
      CHECK(fam.back().measure.weights()[j] == doctest::Approx(1.0 - r2).epsilon(1e-14));
    }
  }

  TEST_CASE("random cloud is deterministic under a fixed seed") {
    FamilySpec s;
    s.kind = FamilyKind::random_cloud;
    s.dim = 2;
    s.members = 3;
    s.count = 16;
    s.seed = 9;
    const auto a = generate_family(s), b = generate_family(s);
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].measure.to_json().dump() == b[k].measure.to_json().dump());
      CHECK(a[k].measure.max_radius() <= 0.9);
    }
    CHECK(a[0].measure.to_json().dump() != a[1].measure.to_json().dump());
    s.seed = 10;
    CHECK(generate_family(s)[0].measure.to_json().dump() == a[1].measure.to_json().dump());
  }

  TEST_CASE("from_file round trip") {
    FamilySpec s;
    s.kind = FamilyKind::random_cloud;
    s.dim = 1;
    s.members = 2;
    s.count = 5;
    const auto fam = generate_family(s);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : fam) arr.push_back(m.measure.to_json());
    const auto path = temp_file("family.json");
    std::ofstream(path) << arr.dump();
    FamilySpec f;
    f.kind = FamilyKind::from_file;
    f.dim = 1;
    f.path = path;
    const auto back = generate_family(f);
    REQUIRE(back.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) CHECK(back[k].measure.to_json() == fam[k].measure.to_json());
    std::ofstream(path) << fam[0].measure.to_json().dump();
    CHECK(generate_family(f).size() == 1);
    f.dim = 2;
    CHECK_THROWS_AS(generate_family(f), ConfigError);
    std::filesystem::remove(path);
  }

  TEST_CASE("config parsing") {
    const ExperimentConfig c = ExperimentConfig::parse(
        "# comment line\n"
        "experiment = thm6.2-band   # trailing comment\n"
        "dim = 2\n"
        "family = random_cloud\n"
        "count = 12\n"
        "p = 1.5\n"
        "t = 3\n"
        "seed = 17\n"
        "band_width = 50\n"
        "a_values = 0.2, 0.4\n");
    CHECK(c.experiment == Experiment::thm62_band);
    CHECK(c.family.dim == 2);
    CHECK(c.family.kind == FamilyKind::random_cloud);
    CHECK(c.family.count == 12);
    CHECK(c.p == 1.5);
    CHECK(*c.t == 3.0);
    CHECK(c.seed == 17);
    CHECK(c.family.seed == 17);
    CHECK(*c.band_width == 50.0);
    CHECK(c.a_values == std::vector<double>{0.2, 0.4});
    CHECK(c.to_json()["experiment"] == "thm6.2-band");

    CHECK(config_error("experiment = thm1.1-band\nsigma = 2\n").find("unknown key 'sigma'") != std::string::npos);
    CHECK(config_error("experiment = thm1.1-band\np = 2\np = 3\n").find("duplicate") != std::string::npos);
    CHECK(config_error("experiment = thm1.1-band\np = two\n").find("expects a number") != std::string::npos);
    CHECK(config_error("experiment = thm9\n").find("unknown experiment") != std::string::npos);
    CHECK(config_error("dim = 1\n").find("missing key 'experiment'") != std::string::npos);
    CHECK(config_error("experiment = thm1.1-band\nnonsense\n").find("line 2") != std::string::npos);
  }

  TEST_CASE("hypothesis violations name the hypothesis") {
    // t_p = n/p - n = 1 for n = 1, p = 0.5
    CHECK(config_error("experiment = thm6.2-band\ndim = 1\np = 0.5\nt = 1\n").find("t > t_p") != std::string::npos);
    CHECK(config_error("experiment = thm6.2-band\ndim = 1\np = 0.5\n").find("t > t_p") != std::string::npos);
    CHECK(config_error("experiment = thm6.2-band\ndim = 1\np = 0.5\nt = 1.01\n").empty());
    CHECK(config_error("experiment = thm1.1-band\np = 3\nq = 2\n").find("p <= q") != std::string::npos);
    CHECK(config_error("experiment = thm1.1-band\np = 2\nq = 4\ns = 1\n").find("s = 1 + 1/p - 1/q") !=
          std::string::npos);
    CHECK(config_error("experiment = thm1.1-band\np = 2\nq = 4\ns = 1.25\n").empty());
    CHECK(config_error("experiment = thm1.2-band\np = 2\nq = 4\n").find("q < p") != std::string::npos);
    CHECK(config_error("experiment = thm1.2-band\np = 4\nq = 2\nr = 3\n").find("r = pq/(p - q)") !=
          std::string::npos);
    CHECK(config_error("experiment = thm1.1-band\ngamma = 1\n").find("gamma > 1") != std::string::npos);
    CHECK(config_error("experiment = sec7-wcomp\ndim = 2\n").find("dim = 1") != std::string::npos);
    CHECK(config_error("experiment = sec7-volterra\ng = 3\n").find("g nonconstant") != std::string::npos);
  }

  TEST_CASE("bounded-embedding band on the boundary family") {
    const ExperimentConfig c = ExperimentConfig::parse(
        "experiment = thm1.1-band\ndim = 1\nfamily = boundary_accumulation\nrate = 1\nmembers = 8\n"
        "band_width = 20\n");
    const ExperimentReport r = run(c);
    REQUIRE(r.rows.size() == 8);
    REQUIRE(r.bands.size() == 1);
    CHECK(r.bands[0].pass);
    CHECK(r.passed);
    // frozen from calibration: ratios 1.048 .. 1.667
    CHECK(r.bands[0].min >= 1.0);
    CHECK(r.bands[0].max <= 1.8);
    for (std::size_t k = 0; k < 8; ++k) {
      CHECK(r.rows[k].member == k);
      CHECK(r.rows[k].param == static_cast<double>(4 + k));
      CHECK(r.rows[k].ratio == doctest::Approx(r.rows[k].a / r.rows[k].b));
    }
  }

  TEST_CASE("band violations name the member") {
    ExperimentConfig c = ExperimentConfig::parse(
        "experiment = thm1.1-band\ndim = 1\nfamily = boundary_accumulation\nmembers = 3\nband_max = 1.1\n");
    const ExperimentReport r = run(c);
    CHECK_FALSE(r.passed);
    REQUIRE_FALSE(r.bands[0].violations.empty());
    CHECK(r.bands[0].violations[0].find("member 1") != std::string::npos);
    CHECK(r.to_json()["passed"] == false);
  }

  TEST_CASE("compactness profile on delta_0 is vanishing") {
    const auto path = temp_file("delta0.json");
    std::ofstream(path) << R"({"dim": 1, "atoms": [{"z": [0, 0], "c": 1}]})";
    ExperimentConfig c = ExperimentConfig::parse("experiment = sec5-profile\ndim = 1\nfamily = from_file\npath = x\n");
    c.family.path = path;
    const ExperimentReport r = run(c);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].flag == "vanishing");
    CHECK(r.passed);
    std::filesystem::remove(path);
  }

  TEST_CASE("compactness flags agree on growth chains") {
    for (double rate : {2.0, 1.0, 0.5}) {
      ExperimentConfig c =
          ExperimentConfig::parse("experiment = sec5-profile\ndim = 1\nfamily = boundary_accumulation\nmembers = 8\n");
      c.family.rate = rate;
      const ExperimentReport r = run(c);
      CHECK(r.passed);
      CHECK(r.rows.back().flag == (rate > 1.0 ? "vanishing" : "non-vanishing"));
    }
  }

  TEST_CASE("reports are deterministic and schema-stable") {
    const ExperimentConfig c = ExperimentConfig::parse(
        "experiment = thm6.2-band\ndim = 1\nfamily = random_cloud\ncount = 8\nmembers = 2\np = 1\nquad_samples = 64\n");
    const ExperimentReport a = run(c), b = run(c);
    const std::string csv = a.to_csv();
    CHECK(csv == b.to_csv());
    CHECK(csv.substr(0, csv.find('\n')) == ExperimentReport::csv_header());
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 4);
    const nlohmann::json j = a.to_json();
    CHECK(j["schema_version"] == kReportSchemaVersion);
    CHECK(j["stamp"]["version"] == std::string(library_version()));
    CHECK(j["rows"].size() == 8);
    // JSON mirrors CSV at full precision
    CHECK(j["rows"][0]["ratio"].get<double>() == a.rows[0].ratio);
    for (const auto& row : a.rows)
      if (row.pair == "S1/trace") CHECK(row.flag == "exact");
  }
}

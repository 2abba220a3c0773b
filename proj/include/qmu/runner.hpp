#pragma once
// Measure families, experiment configuration and the band
// experiments with their CSV and JSON reports.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qmu/disk.hpp"
#include "qmu/lattice.hpp"
#include "qmu/measure.hpp"

namespace qmu {

inline constexpr int kReportSchemaVersion = 1;
std::string_view library_version();

enum class FamilyKind { boundary_accumulation, lattice_uniform, random_cloud, from_file };

struct FamilySpec {
  FamilyKind kind = FamilyKind::boundary_accumulation;
  std::size_t dim = 1;
  std::size_t members = 8;
  /// boundary_accumulation: member k carries atoms j = 1..base_atoms+k at
  /// (1 - 2^{-j}) e_1 with masses (2^{-j})^{n rate}.
  double rate = 1.0;
  std::size_t base_atoms = 4;
  /// lattice_uniform: one atom per center a_k up to the (k+1)/members radius
  /// quantile of the centers, mass (1-|a_k|^2)^{n weight_exponent}.
  double lattice_r = 0.6;
  double lattice_cover = 0.9;
  double weight_exponent = 1.0;
  /// random_cloud: count atoms, Bergman radius uniform on [0, atanh(cloud_radius)],
  /// direction uniform, mass (1-|z|^2)^n; member k uses seed + k.
  std::size_t count = 32;
  double cloud_radius = 0.9;
  /// from_file: a measure JSON object or an array of them.
  std::filesystem::path path;
  std::uint64_t seed = 1;
};

struct FamilyMember {
  /// Depth log2(1/(1 - max|z|)) for boundary chains, else the member index.
  double param = 0.0;
  AtomicMeasure measure;
  /// The generating lattice (lattice_uniform only); shared by all members.
  std::shared_ptr<const Lattice> lattice;
};

std::vector<FamilyMember> generate_family(const FamilySpec& spec);

enum class Experiment { thm11_band, thm12_band, thm62_band, sec5_profile, sec7_wcomp, sec7_volterra };

std::string_view experiment_name(Experiment e);

struct ExperimentConfig {
  Experiment experiment = Experiment::thm11_band;
  FamilySpec family;
  double p = 2.0;
  double q = 2.0;
  std::optional<double> s;
  std::optional<double> t;
  std::optional<double> r;
  double gamma = kDefaultAperture;
  std::uint64_t seed = 1;
  std::size_t sphere_nodes = 4096;
  std::size_t quad_samples = 256;
  std::size_t directions = 64;
  std::optional<double> band_min;
  std::optional<double> band_max;
  std::optional<double> band_width;
  bool test_mode = false;
  std::string out_csv;
  std::string out_json;
  std::vector<double> a_values{0.3, 0.5, 0.7, 0.9};
  std::vector<double> p_values{0.75, 1.0, 2.0, 4.0};
  Polynomial g{0.0, 1.0};
  std::size_t grid_size = 512;

  /// Flat "key = value" text; '#' starts a comment. Unknown or repeated keys
  /// and malformed values raise ConfigError.
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Checks the experiment hypotheses; ConfigError names the
  /// violated one.
  void validate() const;
  nlohmann::json to_json() const;
};

struct ReportRow {
  std::size_t member = 0;
  double param = 0.0;
  std::string pair;
  double a = 0.0;
  double b = 0.0;
  double ratio = 0.0;
  std::string flag;
};

struct BandSummary {
  std::string pair;
  double min = 0.0;
  double max = 0.0;
  /// Least-squares slopes of ln a and ln b against ln(1/(1 - max|z|)) over
  /// the members (0 when not applicable).
  double slope_a = 0.0;
  double slope_b = 0.0;
  bool pass = true;
  std::vector<std::string> violations;
};

struct ExperimentReport {
  Experiment experiment = Experiment::thm11_band;
  nlohmann::json config;
  std::vector<ReportRow> rows;
  std::vector<BandSummary> bands;
  std::vector<std::string> notes;
  bool passed = true;

  static std::string csv_header();
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

ExperimentReport run(const ExperimentConfig& config);

}  // namespace qmu

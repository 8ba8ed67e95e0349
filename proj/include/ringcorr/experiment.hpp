#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ringcorr/ensemble.hpp"
#include "ringcorr/random.hpp"
#include "ringcorr/singlering.hpp"
#include "ringcorr/spectral.hpp"
#include "ringcorr/stats.hpp"

namespace ringcorr {

enum class GridSpacing { Auto, Uniform, Log };

struct GridConfig {
  int bins = 40;
  std::optional<double> r_lo;
  std::optional<double> r_hi;
  GridSpacing spacing = GridSpacing::Auto;
};

/// One experiment, as read from a JSON config file and command-line flags.
struct ExperimentConfig {
  EnsembleSpec ensemble;
  /// Model description; the string "auto" resolves from the ensemble.
  nlohmann::json model = "auto";
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  GridConfig grid;
  double c_edge = 3.0;
  std::optional<double> bulk_lo;
  std::optional<double> bulk_hi;
  double max_err_overlap = 0.02;
  double max_err_rho = 0.02;
  std::filesystem::path out_dir = ".";
  int workers = 1;
  bool dump_samples = false;

  int dimension() const { return ensemble.dimension; }
  /// Throws Error(ConfigInvalid).
  void validate() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

EnsembleSpec ensemble_from_json(const nlohmann::json& j, int dimension);
AnalyticModel model_from_json(const nlohmann::json& j);

/// Resolves "auto" for the four built-in families (products of Ginibres,
/// products of truncated Haars with a common kappa, k Ginibres times k inverse
/// Ginibres, sums of Haar unitaries). Anything else needs an explicit model.
AnalyticModel resolve_model(const EnsembleSpec& spec, const nlohmann::json& model);

RadialGrid make_grid(const GridConfig& grid, const AnalyticModel& model);

/// One accepted sample, delivered in sample-index order.
struct SampleResult {
  std::int64_t index = 0;
  std::int64_t attempts = 1;
  std::vector<OverlapRecord> records;
  double residual = 0.0;
  double biorthogonality_defect = 0.0;
  double similarity_condition = 0.0;
};

struct RunCounters {
  std::int64_t draws = 0;
  std::int64_t rejected_singular_factor = 0;
  std::int64_t rejected_ill_conditioned = 0;
  double max_residual = 0.0;
  double max_biorthogonality_defect = 0.0;
  double max_similarity_condition = 0.0;
  std::int64_t rejected() const { return rejected_singular_factor + rejected_ill_conditioned; }
};

/// Realizes and decomposes samples 0..m-1 on `workers` threads. Rejected draws
/// are redrawn from the next attempt stream of the same sample; more than 3m
/// draws in total raise Error(RejectionCapExceeded). `on_sample` runs on the
/// calling thread in index order, so anything it accumulates is independent of
/// the worker count.
RunCounters for_each_sample(const EnsembleSpec& spec, const SeedPolicy& seeds, std::int64_t m, int workers,
                            const std::function<void(const SampleResult&)>& on_sample);

struct SampleRun {
  RadialProfile profile;
  RunCounters counters;
};

/// Samples the configured ensemble into a radial profile. When
/// `sample_dump` is given, writes rows sample_index,i,re,im,O_ii.
SampleRun run_sample(const ExperimentConfig& config, const RadialGrid& grid, std::ostream* sample_dump = nullptr);

/// Table of r, F, rho, O, c. Radii with r <= 0 are skipped.
void run_predict(const AnalyticModel& model, std::span<const double> radii, std::ostream& os);
std::vector<double> default_predict_radii(const AnalyticModel& model, int points = 201);

/// Loads either a comparison-report CSV (binned) or a predict table
/// (pointwise rows with r_lo = r_hi = r).
std::vector<BinEstimate> load_profile_rows(std::istream& is);

struct CompareOutcome {
  ComparisonReport report;
  bool passed = false;
};

CompareOutcome judge(const ComparisonReport& report, double max_err_overlap, double max_err_rho);

nlohmann::json summary_json(const CompareOutcome& outcome, const RunCounters* counters = nullptr);

struct OracleCheck {
  std::string name;
  bool passed = false;
  double expected = 0.0;
  double actual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// Deterministic invariant suite: 2x2 overlap oracle, eigensystem defects,
/// resolvent identities, incomplete-gamma reference values, mapping round
/// trips, and the ensemble-averaged resolvent at z = 0.5.
std::vector<OracleCheck> run_oracle(std::uint64_t seed = 7);

}  // namespace ringcorr

// ringcorr: sample | predict | compare | oracle
//
// Exit status: 0 pass, 1 comparison or oracle failure, 2 config/runtime error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ringcorr/errors.hpp"
#include "ringcorr/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ringcorr;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  std::optional<int> bins;
  std::optional<double> c_edge;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "experiment config (JSON)");
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--out-dir", f.out_dir, "output directory");
  app->add_option("--bins", f.bins, "radial bins")->check(CLI::PositiveNumber);
  app->add_option("--c-edge", f.c_edge, "edge exclusion, in units of N^-1/2")->check(CLI::NonNegativeNumber);
}

// Config from file (if any) with flag overrides applied.
ExperimentConfig effective_config(const CommonFlags& f, bool need_file) {
  ExperimentConfig c;
  if (!f.config.empty()) {
    c = load_config(f.config);
  } else if (need_file) {
    throw Error(ErrorCode::ConfigInvalid, "--config is required");
  }
  if (f.seed) c.seed = *f.seed;
  if (f.workers) c.workers = *f.workers;
  if (f.out_dir) c.out_dir = *f.out_dir;
  if (f.bins) c.grid.bins = *f.bins;
  if (f.c_edge) c.c_edge = *f.c_edge;
  return c;
}

// --model accepts inline JSON, a path to a JSON file, or "auto".
json parse_model_flag(const std::string& text) {
  if (text == "auto") return "auto";
  if (fs::exists(text)) {
    std::ifstream in(text);
    return json::parse(in);
  }
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, "--model: " + std::string(e.what()));
  }
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream os(dir / name);
  if (!os) throw Error(ErrorCode::ConfigInvalid, "cannot write " + (dir / name).string());
  return os;
}

CompareOptions compare_options(const ExperimentConfig& c) { return {c.c_edge, c.bulk_lo, c.bulk_hi}; }

void write_outputs(const fs::path& dir, const CompareOutcome& outcome, const RunCounters* counters) {
  auto csv = open_out(dir, "profile.csv");
  write_report_csv(csv, outcome.report);
  const json summary = summary_json(outcome, counters);
  auto js = open_out(dir, "summary.json");
  js << summary.dump(2) << '\n';
  std::cout << summary.dump(2) << '\n';
}

int cmd_sample(const CommonFlags& f, std::optional<int> n, std::optional<std::int64_t> m, bool dump, bool judge_exit) {
  ExperimentConfig c = effective_config(f, true);
  if (n) c.ensemble.dimension = *n;
  if (m) c.samples = *m;
  if (dump) c.dump_samples = true;
  c.validate();
  const AnalyticModel model = resolve_model(c.ensemble, c.model);
  const RadialGrid grid = make_grid(c.grid, model);

  std::optional<std::ofstream> dump_stream;
  if (c.dump_samples) dump_stream = open_out(c.out_dir, "samples.csv");
  const SampleRun run = run_sample(c, grid, dump_stream ? &*dump_stream : nullptr);

  const auto rows = c.samples >= 2 ? standard_errors(run.profile) : run.profile.finalize();
  const auto report =
      compare(rows, c.dimension(), run.profile.samples(), run.profile.rejected(), model, compare_options(c));
  const auto outcome = judge(report, c.max_err_overlap, c.max_err_rho);
  write_outputs(c.out_dir, outcome, &run.counters);
  if (!judge_exit) return kExitPass;
  return outcome.passed ? kExitPass : kExitFail;
}

int cmd_predict(const CommonFlags& f, const std::string& model_flag, const std::vector<double>& radii, int points) {
  json model_json = "auto";
  EnsembleSpec spec;
  if (!f.config.empty()) {
    const ExperimentConfig c = effective_config(f, true);
    spec = c.ensemble;
    model_json = c.model;
  }
  if (!model_flag.empty()) model_json = parse_model_flag(model_flag);
  if (f.config.empty() && model_json.is_string()) {
    throw Error(ErrorCode::ConfigInvalid, "predict needs --model or --config");
  }
  const AnalyticModel model = resolve_model(spec, model_json);
  const auto r = radii.empty() ? default_predict_radii(model, f.bins.value_or(points)) : radii;
  if (f.out_dir) {
    auto os = open_out(*f.out_dir, "predict.csv");
    run_predict(model, r, os);
  } else {
    run_predict(model, r, std::cout);
  }
  return kExitPass;
}

// N and M for a saved profile: --n, else summary.json next to the profile.
std::pair<int, std::int64_t> profile_shape(const fs::path& profile, std::optional<int> n_flag) {
  int n = n_flag.value_or(0);
  std::int64_t m = 0;
  const fs::path summary = profile.parent_path() / "summary.json";
  if (fs::exists(summary)) {
    std::ifstream in(summary);
    const json s = json::parse(in, nullptr, false);
    if (!s.is_discarded()) {
      if (!n_flag && s.contains("N")) n = s.at("N").get<int>();
      if (s.contains("M")) m = s.at("M").get<std::int64_t>();
    }
  }
  if (n < 1) throw Error(ErrorCode::ConfigInvalid, "profile dimension unknown; pass --n");
  return {n, m};
}

int cmd_compare(const CommonFlags& f, const std::string& profile, const std::string& model_flag,
                std::optional<int> n_flag, std::optional<double> max_o, std::optional<double> max_rho) {
  if (profile.empty()) {
    // Fresh run from the config, judged against its model.
    return cmd_sample(f, n_flag, std::nullopt, false, true);
  }
  ExperimentConfig c = effective_config(f, false);
  json model_json = c.model;
  if (!model_flag.empty()) model_json = parse_model_flag(model_flag);
  if (f.config.empty() && model_json.is_string()) {
    throw Error(ErrorCode::ConfigInvalid, "compare --profile needs --model or --config");
  }
  const AnalyticModel model = resolve_model(c.ensemble, model_json);
  if (max_o) c.max_err_overlap = *max_o;
  if (max_rho) c.max_err_rho = *max_rho;

  std::ifstream in(profile);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open profile " + profile);
  const auto rows = load_profile_rows(in);
  const auto [n, m] = profile_shape(profile, n_flag ? n_flag : (c.dimension() > 0 ? std::optional(c.dimension()) : std::nullopt));
  const auto report = compare(rows, n, m, 0, model, compare_options(c));
  const auto outcome = judge(report, c.max_err_overlap, c.max_err_rho);
  const fs::path dir = f.out_dir ? fs::path(*f.out_dir) : fs::path(profile).parent_path() / "compare";
  write_outputs(dir, outcome, nullptr);
  return outcome.passed ? kExitPass : kExitFail;
}

int cmd_oracle(const CommonFlags& f) {
  const auto checks = run_oracle(f.seed.value_or(7));
  int failed = 0;
  std::cout << std::setprecision(17);
  for (const auto& c : checks) {
    std::cout << (c.passed ? "PASS  " : "FAIL  ") << c.name;
    if (!c.detail.empty()) std::cout << " [" << c.detail << "]";
    if (!c.passed) {
      std::cout << "  expected " << c.expected << " actual " << c.actual;
      if (c.tolerance > 0.0) std::cout << " tol " << c.tolerance;
      ++failed;
    }
    std::cout << '\n';
  }
  std::cout << (checks.size() - failed) << "/" << checks.size() << " checks passed\n";
  return failed == 0 ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenvector overlap statistics for biunitarily invariant random matrices"};
  app.require_subcommand(1);

  CommonFlags sample_flags, predict_flags, compare_flags, oracle_flags;

  auto* sample = app.add_subcommand("sample", "sample the configured ensemble into a radial profile");
  add_common(sample, sample_flags);
  std::optional<int> sample_n;
  std::optional<std::int64_t> sample_m;
  bool dump = false;
  sample->add_option("-N,--dimension", sample_n, "matrix dimension override")->check(CLI::PositiveNumber);
  sample->add_option("-M,--samples", sample_m, "sample count override")->check(CLI::PositiveNumber);
  sample->add_flag("--dump-samples", dump, "write samples.csv with every eigenvalue and O_ii");

  auto* predict = app.add_subcommand("predict", "tabulate r, F, rho, O, c for a model");
  add_common(predict, predict_flags);
  std::string predict_model;
  std::vector<double> predict_r;
  int points = 201;
  predict->add_option("--model", predict_model, "model JSON (inline or file)");
  predict->add_option("--r", predict_r, "radii to tabulate");
  predict->add_option("--points", points, "number of default radii")->check(CLI::PositiveNumber);

  auto* cmp = app.add_subcommand("compare", "compare a profile (or a fresh run) against a model");
  add_common(cmp, compare_flags);
  std::string cmp_profile, cmp_model;
  std::optional<int> cmp_n;
  std::optional<double> max_o, max_rho;
  cmp->add_option("--profile", cmp_profile, "profile.csv or predict table");
  cmp->add_option("--model", cmp_model, "model JSON (inline or file); default from config");
  cmp->add_option("--n", cmp_n, "matrix dimension of the profile")->check(CLI::PositiveNumber);
  cmp->add_option("--max-err-O", max_o, "bulk sup-error threshold for O")->check(CLI::PositiveNumber);
  cmp->add_option("--max-err-rho", max_rho, "bulk sup-error threshold for rho")->check(CLI::PositiveNumber);

  auto* oracle = app.add_subcommand("oracle", "deterministic invariant suite");
  add_common(oracle, oracle_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitError;
  }

  try {
    if (*sample) return cmd_sample(sample_flags, sample_n, sample_m, dump, false);
    if (*predict) return cmd_predict(predict_flags, predict_model, predict_r, points);
    if (*cmp) return cmd_compare(compare_flags, cmp_profile, cmp_model, cmp_n, max_o, max_rho);
    if (*oracle) return cmd_oracle(oracle_flags);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

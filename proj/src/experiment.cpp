#include "ringcorr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "ringcorr/errors.hpp"

namespace ringcorr {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigInvalid, what); }

FactorKind factor_kind_from(const std::string& s) {
  if (s == "ginibre") return FactorKind::Ginibre;
  if (s == "inverse_ginibre") return FactorKind::InverseGinibre;
  if (s == "haar_unitary" || s == "haar") return FactorKind::HaarUnitary;
  if (s == "truncated_haar") return FactorKind::TruncatedHaar;
  config_error("unknown factor kind '" + s + "'");
}

// Expands {"kind": ..., "count": c, "kappa": k} entries into a flat list.
std::vector<FactorSpec> factors_from_json(const json& arr) {
  if (!arr.is_array() || arr.empty()) config_error("'factors' must be a nonempty array");
  std::vector<FactorSpec> out;
  for (const auto& f : arr) {
    if (!f.is_object() || !f.contains("kind")) config_error("each factor needs a 'kind'");
    FactorSpec spec;
    spec.kind = factor_kind_from(f.at("kind").get<std::string>());
    spec.kappa = f.value("kappa", 0.0);
    const int count = f.value("count", 1);
    if (count < 1) config_error("factor 'count' must be >= 1");
    for (int i = 0; i < count; ++i) out.push_back(spec);
  }
  return out;
}

// S-transform of the squared radial part of a single factor.
STransform factor_s_transform(const FactorSpec& f) {
  switch (f.kind) {
    case FactorKind::Ginibre: return [](double z) { return 1.0 / (1.0 + z); };
    case FactorKind::InverseGinibre: return [](double z) { return -z; };
    case FactorKind::HaarUnitary: return [](double) { return 1.0; };
    case FactorKind::TruncatedHaar: {
      const double kappa = f.kappa;
      if (!(kappa > 0.0)) config_error("custom_s truncated_haar factor needs kappa > 0");
      return [kappa](double z) { return (1.0 + kappa + z) / (1.0 + z); };
    }
  }
  config_error("unknown factor kind");
}

int positive_int(const json& j, const char* key) {
  if (!j.contains(key)) config_error(std::string("model needs '") + key + "'");
  const int v = j.at(key).get<int>();
  if (v < 1) config_error(std::string("model '") + key + "' must be >= 1");
  return v;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  ensemble.validate();
  if (samples < 1) config_error("M must be >= 1");
  if (grid.bins < 1) config_error("grid bins must be >= 1");
  if (!(c_edge >= 0.0)) config_error("c_edge must be >= 0");
  if (workers < 1) config_error("workers must be >= 1");
  if (!(max_err_overlap > 0.0) || !(max_err_rho > 0.0)) config_error("thresholds must be positive");
}

EnsembleSpec ensemble_from_json(const json& j, int dimension) {
  if (!j.is_object()) config_error("'ensemble' must be an object");
  EnsembleSpec spec;
  const std::string combine = j.value("combine", "product");
  if (combine == "product") {
    spec.combine = Combine::Product;
  } else if (combine == "sum") {
    spec.combine = Combine::Sum;
  } else {
    config_error("'combine' must be 'product' or 'sum'");
  }
  if (!j.contains("factors")) config_error("ensemble needs 'factors'");
  spec.factors = factors_from_json(j.at("factors"));
  spec.dimension = dimension;
  return spec;
}

AnalyticModel model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) config_error("model must be \"auto\" or an object with 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  try {
    if (kind == "ginibre_product") return AnalyticModel::ginibre_product(positive_int(j, "n"));
    if (kind == "truncated_haar_product") {
      return AnalyticModel::truncated_haar_product(positive_int(j, "n"), j.value("kappa", 0.0));
    }
    if (kind == "spherical_product") return AnalyticModel::spherical_product(positive_int(j, "k"));
    if (kind == "haar_sum") return AnalyticModel::haar_sum(positive_int(j, "k"));
    if (kind == "custom_s") {
      // Free multiplicative convolution: S-transforms of the factors multiply.
      if (!j.contains("factors")) config_error("custom_s model needs 'factors'");
      std::vector<STransform> parts;
      for (const auto& f : factors_from_json(j.at("factors"))) parts.push_back(factor_s_transform(f));
      STransform s = [parts](double z) {
        double v = 1.0;
        for (const auto& p : parts) v *= p(z);
        return v;
      };
      return AnalyticModel::custom(std::move(s), "custom_s(" + j.at("factors").dump() + ")");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    config_error(e.what());
  }
  config_error("unknown model kind '" + kind + "'");
}

AnalyticModel resolve_model(const EnsembleSpec& spec, const json& model) {
  if (!(model.is_string() && model.get<std::string>() == "auto")) return model_from_json(model);

  int ginibre = 0;
  int inverse = 0;
  int haar = 0;
  int truncated = 0;
  std::optional<double> kappa;
  bool common_kappa = true;
  for (const auto& f : spec.factors) {
    switch (f.kind) {
      case FactorKind::Ginibre: ++ginibre; break;
      case FactorKind::InverseGinibre: ++inverse; break;
      case FactorKind::HaarUnitary: ++haar; break;
      case FactorKind::TruncatedHaar:
        ++truncated;
        if (kappa && *kappa != f.kappa) common_kappa = false;
        kappa = f.kappa;
        break;
    }
  }
  if (spec.combine == Combine::Sum) return AnalyticModel::haar_sum(haar);
  // Haar factors leave the law of a product unchanged (S = 1).
  if (ginibre > 0 && inverse == 0 && truncated == 0) return AnalyticModel::ginibre_product(ginibre);
  if (truncated > 0 && ginibre == 0 && inverse == 0 && common_kappa) {
    return AnalyticModel::truncated_haar_product(truncated, *kappa);
  }
  if (ginibre > 0 && ginibre == inverse && truncated == 0) return AnalyticModel::spherical_product(ginibre);
  if (haar > 0 && ginibre == 0 && inverse == 0 && truncated == 0) return AnalyticModel::haar_sum(1);
  config_error("'auto' model cannot describe this mixed ensemble; give an explicit custom_s model");
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) config_error("config root must be an object");
  ExperimentConfig c;
  try {
    const int n = j.value("N", 0);
    if (!j.contains("ensemble")) config_error("config needs 'ensemble'");
    c.ensemble = ensemble_from_json(j.at("ensemble"), n);
    c.samples = j.value("M", std::int64_t{0});
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("model")) c.model = j.at("model");
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      c.grid.bins = g.value("bins", 40);
      if (g.contains("r_lo")) c.grid.r_lo = g.at("r_lo").get<double>();
      if (g.contains("r_hi")) c.grid.r_hi = g.at("r_hi").get<double>();
      const std::string spacing = g.value("spacing", "auto");
      if (spacing == "auto") {
        c.grid.spacing = GridSpacing::Auto;
      } else if (spacing == "uniform") {
        c.grid.spacing = GridSpacing::Uniform;
      } else if (spacing == "log") {
        c.grid.spacing = GridSpacing::Log;
      } else {
        config_error("grid spacing must be auto, uniform or log");
      }
    }
    c.c_edge = j.value("c_edge", 3.0);
    if (j.contains("bulk")) {
      const auto& b = j.at("bulk");
      if (b.contains("r_lo")) c.bulk_lo = b.at("r_lo").get<double>();
      if (b.contains("r_hi")) c.bulk_hi = b.at("r_hi").get<double>();
    }
    if (j.contains("thresholds")) {
      const auto& t = j.at("thresholds");
      c.max_err_overlap = t.value("O", c.max_err_overlap);
      c.max_err_rho = t.value("rho", c.max_err_rho);
    }
    c.out_dir = j.value("out_dir", std::string("."));
    c.workers = j.value("workers", 1);
    c.dump_samples = j.value("dump_samples", false);
  } catch (const json::exception& e) {
    config_error(e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    config_error(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

RadialGrid make_grid(const GridConfig& grid, const AnalyticModel& model) {
  if (!grid.r_lo && !grid.r_hi && grid.spacing == GridSpacing::Auto) {
    return RadialGrid::default_for(model, grid.bins);
  }
  const RadialGrid fallback = RadialGrid::default_for(model, grid.bins);
  const double lo = grid.r_lo.value_or(fallback.edges().front());
  const double hi = grid.r_hi.value_or(fallback.edges().back());
  const bool log = grid.spacing == GridSpacing::Log ||
                   (grid.spacing == GridSpacing::Auto && !std::isfinite(model.support().r_max) && lo > 0.0);
  return log ? RadialGrid::log_spaced(lo, hi, grid.bins) : RadialGrid::uniform(lo, hi, grid.bins);
}

RunCounters for_each_sample(const EnsembleSpec& spec, const SeedPolicy& seeds, std::int64_t m, int workers,
                            const std::function<void(const SampleResult&)>& on_sample) {
  spec.validate();
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  workers = std::max(1, workers);
  const std::int64_t per_sample_cap = 2 * m + 1;

  struct Slot {
    SampleResult result;
    std::int64_t singular = 0;
    std::int64_t ill = 0;
  };

  auto draw = [&](std::int64_t index) {
    Slot slot;
    slot.result.index = index;
    for (std::int64_t attempt = 0;; ++attempt) {
      if (attempt >= per_sample_cap) {
        std::ostringstream os;
        os << "sample " << index << " rejected " << attempt << " times";
        throw Error(ErrorCode::RejectionCapExceeded, os.str());
      }
      try {
        const ComplexMatrix x = realize(spec, seeds.stream(static_cast<std::uint64_t>(index), static_cast<std::uint64_t>(attempt)));
        const EigenSystem es = eig_full(x);
        slot.result.attempts = attempt + 1;
        slot.result.records = overlaps_diagonal(es);
        slot.result.residual = es.residual;
        slot.result.biorthogonality_defect = es.biorthogonality_defect;
        slot.result.similarity_condition = es.similarity_condition;
        return slot;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::SingularFactor) {
          ++slot.singular;
        } else if (e.code() == ErrorCode::IllConditionedSimilarity) {
          ++slot.ill;
        } else {
          throw;
        }
      }
    }
  };

  RunCounters counters;
  const std::int64_t chunk = std::max<std::int64_t>(1, 4 * static_cast<std::int64_t>(workers));
  std::vector<Slot> slots;
  for (std::int64_t begin = 0; begin < m; begin += chunk) {
    const std::int64_t end = std::min(m, begin + chunk);
    slots.assign(static_cast<std::size_t>(end - begin), Slot{});
    if (workers == 1) {
      for (std::int64_t i = begin; i < end; ++i) slots[static_cast<std::size_t>(i - begin)] = draw(i);
    } else {
      std::atomic<std::int64_t> next{begin};
      std::exception_ptr failure;
      std::mutex failure_mutex;
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::int64_t i = next++; i < end; i = next++) {
            try {
              slots[static_cast<std::size_t>(i - begin)] = draw(i);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
              return;
            }
          }
        });
      }
      for (auto& t : pool) t.join();
      if (failure) std::rethrow_exception(failure);
    }
    for (const auto& slot : slots) {
      counters.draws += slot.result.attempts;
      counters.rejected_singular_factor += slot.singular;
      counters.rejected_ill_conditioned += slot.ill;
      counters.max_residual = std::max(counters.max_residual, slot.result.residual);
      counters.max_biorthogonality_defect =
          std::max(counters.max_biorthogonality_defect, slot.result.biorthogonality_defect);
      counters.max_similarity_condition =
          std::max(counters.max_similarity_condition, slot.result.similarity_condition);
      on_sample(slot.result);
    }
  }
  if (counters.draws > 3 * m) {
    std::ostringstream os;
    os << counters.draws << " draws for " << m << " accepted samples";
    throw Error(ErrorCode::RejectionCapExceeded, os.str());
  }
  return counters;
}

SampleRun run_sample(const ExperimentConfig& config, const RadialGrid& grid, std::ostream* sample_dump) {
  config.validate();
  SampleRun run{RadialProfile(grid, config.dimension()), {}};
  if (sample_dump) *sample_dump << "sample_index,i,re_lambda,im_lambda,O_ii\n" << std::setprecision(17);
  run.counters = for_each_sample(config.ensemble, SeedPolicy{config.seed}, config.samples, config.workers,
                                 [&](const SampleResult& s) {
                                   run.profile.accumulate(s.records);
                                   if (sample_dump) {
                                     for (std::size_t i = 0; i < s.records.size(); ++i) {
                                       const auto& r = s.records[i];
                                       *sample_dump << s.index << ',' << i << ',' << r.eigenvalue.real() << ','
                                                    << r.eigenvalue.imag() << ',' << r.overlap << '\n';
                                     }
                                   }
                                 });
  run.profile.add_rejected(run.counters.rejected());
  return run;
}

std::vector<double> default_predict_radii(const AnalyticModel& model, int points) {
  const auto& sup = model.support();
  const double hi = std::isfinite(sup.r_max) ? sup.r_max + 0.1 : 10.0;
  const double lo = std::max(sup.r_min, 0.0);
  std::vector<double> radii;
  for (int i = 1; i <= points; ++i) radii.push_back(lo + (hi - lo) * i / points);
  return radii;
}

void run_predict(const AnalyticModel& model, std::span<const double> radii, std::ostream& os) {
  os << "r,F,rho,O,c\n";
  for (const double r : radii) {
    if (!(r > 0.0)) continue;
    const double f = radial_cdf(model, r);
    const double rho = radial_density(model, r);
    const double o = overlap_correlator(model, r);
    const double c = rho > 0.0 ? o / rho : std::numeric_limits<double>::quiet_NaN();
    os << fmt(r) << ',' << fmt(f) << ',' << fmt(rho) << ',' << fmt(o) << ',' << fmt(c) << '\n';
  }
}

std::vector<BinEstimate> load_profile_rows(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) config_error("profile file is empty");
  std::map<std::string, std::size_t> col;
  {
    std::stringstream ss(line);
    std::string name;
    std::size_t i = 0;
    while (std::getline(ss, name, ',')) col[name] = i++;
  }
  const bool binned = col.count("r_lo") && col.count("r_hi") && col.count("O_hat") && col.count("rho_hat");
  const bool table = col.count("r") && col.count("O") && col.count("rho");
  if (!binned && !table) config_error("unrecognized profile columns: " + line);

  std::vector<BinEstimate> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
    auto get = [&](const char* name) {
      const auto it = col.find(name);
      return it == col.end() || it->second >= v.size() ? std::numeric_limits<double>::quiet_NaN() : v[it->second];
    };
    BinEstimate e;
    if (binned) {
      e.r_lo = get("r_lo");
      e.r_hi = get("r_hi");
      e.r_mid = col.count("r_mid") ? get("r_mid") : 0.5 * (e.r_lo + e.r_hi);
      e.count = col.count("count") ? static_cast<std::int64_t>(get("count")) : 0;
      e.rho_hat = get("rho_hat");
      e.rho_se = get("rho_se");
      e.overlap_hat = get("O_hat");
      e.overlap_se = get("O_se");
      e.c_hat = get("c_hat");
    } else {
      e.r_lo = e.r_hi = e.r_mid = get("r");
      e.rho_hat = get("rho");
      e.overlap_hat = get("O");
      e.c_hat = get("c");
    }
    rows.push_back(e);
  }
  return rows;
}

CompareOutcome judge(const ComparisonReport& report, double max_err_overlap, double max_err_rho) {
  CompareOutcome out{report, false};
  out.passed = report.bulk_sup_err_overlap <= max_err_overlap && report.bulk_sup_err_rho <= max_err_rho;
  return out;
}

json summary_json(const CompareOutcome& outcome, const RunCounters* counters) {
  const auto& r = outcome.report;
  json j = {
      {"N", r.n},
      {"M", r.samples},
      {"rejected", r.rejected},
      {"bulk_lo", r.bulk_lo},
      {"bulk_hi", r.bulk_hi},
      {"bulk_bins", r.bulk_bins},
      {"bulk_sup_err_O", r.bulk_sup_err_overlap},
      {"bulk_l2_err_O", r.bulk_l2_err_overlap},
      {"bulk_sup_err_rho", r.bulk_sup_err_rho},
      {"bulk_l2_err_rho", r.bulk_l2_err_rho},
      {"bulk_sup_err_c", r.bulk_sup_err_c},
      {"edge_sup_err_O", r.edge_sup_err_overlap},
      {"edge_sup_err_rho", r.edge_sup_err_rho},
      {"passed", outcome.passed},
  };
  if (counters) {
    j["draws"] = counters->draws;
    j["rejected_singular_factor"] = counters->rejected_singular_factor;
    j["rejected_ill_conditioned"] = counters->rejected_ill_conditioned;
    j["max_residual"] = counters->max_residual;
    j["max_biorthogonality_defect"] = counters->max_biorthogonality_defect;
    j["max_similarity_condition"] = counters->max_similarity_condition;
  }
  return j;
}

}  // namespace ringcorr

// Acceptance suite: one PASS/FAIL line per criterion, detail lines indented.
// Seeds are fixed here and never changed to make a criterion pass.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ringcorr/errors.hpp"
#include "ringcorr/experiment.hpp"

using namespace ringcorr;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool passed = false;
  std::string headline;
  std::vector<std::string> details;
};

std::string num(double v, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

int g_workers = 1;

EnsembleSpec product_of(std::vector<FactorSpec> factors, int n) {
  EnsembleSpec s;
  s.factors = std::move(factors);
  s.dimension = n;
  return s;
}

constexpr FactorSpec kGinibre{FactorKind::Ginibre, 0.0};

RadialProfile sample_profile(const EnsembleSpec& spec, const RadialGrid& grid, std::int64_t m, std::uint64_t seed) {
  RadialProfile p(grid, spec.dimension);
  const auto counters =
      for_each_sample(spec, SeedPolicy{seed}, m, g_workers, [&](const SampleResult& s) { p.accumulate(s.records); });
  p.add_rejected(counters.rejected());
  return p;
}

// Largest |error| / standard error over bulk bins: tells noise from bias.
double worst_z(const ComparisonReport& rep, bool overlap) {
  double z = 0.0;
  for (const auto& b : rep.bins) {
    if (!b.in_bulk) continue;
    const double err = overlap ? b.estimate.overlap_hat - b.overlap_analytic : b.estimate.rho_hat - b.rho_analytic;
    const double se = overlap ? b.estimate.overlap_se : b.estimate.rho_se;
    if (se > 0.0) z = std::max(z, std::abs(err) / se);
  }
  return z;
}

std::string bulk_line(const ComparisonReport& rep) {
  return "bulk [" + num(rep.bulk_lo) + ", " + num(rep.bulk_hi) + "], " + std::to_string(rep.bulk_bins) +
         " bins, M=" + std::to_string(rep.samples) + ", rejected " + std::to_string(rep.rejected);
}

// Shared shape of criteria 1, 2, 3, 5: sample, compare in the bulk, judge O (and rho when asked).
Verdict bulk_correlator(const EnsembleSpec& spec, const AnalyticModel& model, std::int64_t m, std::uint64_t seed,
                        std::optional<double> bulk_lo, std::optional<double> bulk_hi, double tol_o,
                        std::optional<double> tol_rho, const RadialGrid& grid) {
  const auto profile = sample_profile(spec, grid, m, seed);
  const auto rows = standard_errors(profile);
  const auto rep = compare(rows, spec.dimension, profile.samples(), profile.rejected(), model, {3.0, bulk_lo, bulk_hi});
  Verdict v;
  v.passed = rep.bulk_sup_err_overlap <= tol_o && (!tol_rho || rep.bulk_sup_err_rho <= *tol_rho);
  v.headline = "sup|O_hat - O| = " + num(rep.bulk_sup_err_overlap) + " (tol " + num(tol_o) + ")";
  if (tol_rho) v.headline += ", sup|rho_hat - rho| = " + num(rep.bulk_sup_err_rho) + " (tol " + num(*tol_rho) + ")";
  v.details.push_back(bulk_line(rep));
  v.details.push_back("L2 err O " + num(rep.bulk_l2_err_overlap) + ", rho " + num(rep.bulk_l2_err_rho) +
                      "; worst |err|/se: O " + num(worst_z(rep, true), 3) + ", rho " + num(worst_z(rep, false), 3));
  v.details.push_back("edge region (not judged): sup err O " + num(rep.edge_sup_err_overlap) + ", rho " +
                      num(rep.edge_sup_err_rho));
  return v;
}

Verdict criterion1() {
  const int n = 512;
  return bulk_correlator(product_of({kGinibre}, n), AnalyticModel::ginibre_product(1), 50, 1001, 0.1, std::nullopt,
                         0.02, 0.02, RadialGrid::uniform(0.0, 1.1, 40));
}

Verdict criterion2() {
  const auto model = AnalyticModel::ginibre_product(2);
  return bulk_correlator(product_of({kGinibre, kGinibre}, 256), model, 50, 1002, 0.25, std::nullopt, 0.03,
                         std::nullopt, RadialGrid::default_for(model));
}

Verdict criterion3() {
  const auto model = AnalyticModel::truncated_haar_product(1, 1.0);
  return bulk_correlator(product_of({{FactorKind::TruncatedHaar, 1.0}}, 400), model, 50, 1003, std::nullopt,
                         std::nullopt, 0.03, std::nullopt, RadialGrid::default_for(model));
}

Verdict criterion4() {
  const int n = 300;
  const auto model = AnalyticModel::spherical_product(1);
  const auto profile = sample_profile(product_of({kGinibre, {FactorKind::InverseGinibre, 0.0}}, n),
                                      RadialGrid::default_for(model), 100, 1004);
  const auto rows = standard_errors(profile);
  Verdict v;
  v.passed = true;
  int judged = 0;
  double worst = 0.0;
  double worst_r = 0.0;
  for (const auto& e : rows) {
    if (e.r_lo < 0.2 || e.r_hi > 3.0 || e.count < 200) continue;
    ++judged;
    // c_hat is the bin mean of O_ii / N; the claim is about O_ii / N itself.
    const double rel = std::abs(e.c_hat - 1.0);
    if (rel > worst) {
      worst = rel;
      worst_r = e.r_mid;
    }
    if (rel > 0.10) {
      v.passed = false;
      v.details.push_back("bin [" + num(e.r_lo) + ", " + num(e.r_hi) + "): c_hat " + num(e.c_hat) + " +/- " +
                          num(e.c_se) + ", count " + std::to_string(e.count));
    }
  }
  if (judged == 0) v.passed = false;
  v.headline = "max |c_hat - 1| = " + num(worst) + " at r=" + num(worst_r) + " over " + std::to_string(judged) +
               " bins (tol 0.1)";
  return v;
}

Verdict criterion5() {
  const int n = 256;
  const auto model = AnalyticModel::haar_sum(2);
  EnsembleSpec spec = product_of({{FactorKind::HaarUnitary, 0.0}, {FactorKind::HaarUnitary, 0.0}}, n);
  spec.combine = Combine::Sum;
  return bulk_correlator(spec, model, 50, 1005, 0.2, std::nullopt, 0.03, std::nullopt, RadialGrid::default_for(model));
}

// Composite Simpson on [a, b].
double simpson(const std::function<double(double)>& f, double a, double b, int panels = 400) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

Verdict criterion6() {
  Verdict v;
  v.passed = true;
  struct Run {
    int n;
    std::int64_t m;
    std::uint64_t seed;
  };
  std::vector<std::string> heads;
  for (const Run run : {Run{10, 40000, 1006}, Run{2, 100000, 1007}}) {
    // Six bins of width 0.2: a bin's c_hat is compared with the density-weighted
    // average of the finite-N formula over that bin, which is what it estimates.
    const auto grid = RadialGrid::uniform(0.0, 1.2, 6);
    const auto profile = sample_profile(product_of({kGinibre}, run.n), grid, run.m, run.seed);
    const auto rows = standard_errors(profile);
    double worst = 0.0;
    for (int b = 0; b < grid.bins(); ++b) {
      const auto& e = rows[static_cast<std::size_t>(b)];
      auto weight = [&](double r) { return ginibre_density_finite_N(r, run.n) * r; };
      const double expected =
          simpson([&](double r) { return ginibre_condnum_finite_N(r, run.n) * weight(r); }, grid.lo(b), grid.hi(b)) /
          simpson(weight, grid.lo(b), grid.hi(b));
      const double rel = std::abs(e.c_hat / expected - 1.0);
      worst = std::max(worst, rel);
      std::ostringstream os;
      os << "N=" << run.n << " [" << num(grid.lo(b), 2) << ", " << num(grid.hi(b), 2) << "): c_hat " << num(e.c_hat)
         << " +/- " << num(e.c_se, 2) << " vs " << num(expected) << " (rel " << num(rel, 3) << ", count " << e.count
         << ")";
      v.details.push_back(os.str());
      if (!(rel <= 0.05)) v.passed = false;
    }
    heads.push_back("N=" + std::to_string(run.n) + " max rel err " + num(worst, 3));
  }
  v.headline = heads[0] + ", " + heads[1] + " (tol 0.05)";
  return v;
}

std::vector<AnalyticModel> family_sample() {
  std::vector<AnalyticModel> out;
  for (const int n : {1, 2, 3, 5}) out.push_back(AnalyticModel::ginibre_product(n));
  for (const int n : {1, 2, 3}) {
    for (const double kappa : {0.25, 1.0, 4.0}) out.push_back(AnalyticModel::truncated_haar_product(n, kappa));
  }
  for (const int k : {1, 2, 4}) out.push_back(AnalyticModel::spherical_product(k));
  for (const int k : {2, 3, 6}) out.push_back(AnalyticModel::haar_sum(k));
  return out;
}

Verdict criterion7() {
  Verdict v;
  double ginibre_err = 0.0;
  const STransform s = [](double z) { return 1.0 / (1.0 + z); };
  for (int i = 0; i < 100; ++i) {
    const double r = (i + 0.5) / 100.0;
    ginibre_err = std::max(ginibre_err, std::abs(solve_hl(s, r) - r * r));
  }
  double family_err = 0.0;
  std::string worst_model;
  for (const auto& m : family_sample()) {
    const auto& sup = m.support();
    const double hi = std::isfinite(sup.r_max) ? sup.r_max : 30.0;
    for (int i = 1; i < 200; ++i) {
      const double r = sup.r_min + (hi - sup.r_min) * i / 200.0;
      const double err = std::abs(radial_cdf(m, r) - solve_hl(m.s_transform(), r));
      if (err > family_err) {
        family_err = err;
        worst_model = m.describe();
      }
    }
  }
  v.passed = ginibre_err <= 1e-10 && family_err <= 1e-9;
  v.headline = "S=1/(1+z): max|F - r^2| = " + num(ginibre_err, 3) + " (tol 1e-10); closed forms vs solver " +
               num(family_err, 3) + " (tol 1e-9)";
  v.details.push_back(std::to_string(family_sample().size()) + " models, 199 radii each; worst " + worst_model);
  return v;
}

Verdict criterion8() {
  auto overlap = [](double r) { return (1.0 - r * r) / kPi; };
  const double switch_r = locate_branch_switch(overlap, 1e-3, 1.0 - 1e-3);
  double worst = 0.0;
  int flagged = 0;
  bool branch_point_flagged = false;
  const int points = 2000;
  for (int i = 1; i < points; ++i) {
    const double r = static_cast<double>(i) / points;
    const auto branch = r < switch_r ? Branch::Lower : Branch::Upper;
    const auto d = density_from_overlap(r, overlap(r), -2.0 * r / kPi, branch);
    if (d.singular_at_branch_point) {
      ++flagged;
      continue;
    }
    worst = std::max(worst, std::abs(d.value - 1.0 / kPi));
  }
  const auto at_switch = density_from_overlap(switch_r, overlap(switch_r), -2.0 * switch_r / kPi, Branch::Lower);
  branch_point_flagged = at_switch.singular_at_branch_point;
  Verdict v;
  v.passed = worst <= 1e-6 && branch_point_flagged && std::abs(switch_r - std::sqrt(0.5)) <= 1e-8;
  v.headline = "max|rho - 1/pi| = " + num(worst, 3) + " (tol 1e-6), branch point r=" + num(switch_r, 12) +
               (branch_point_flagged ? " flagged" : " NOT flagged");
  v.details.push_back(std::to_string(points - 1) + " radii on (0, 1), " + std::to_string(flagged) +
                      " grid points flagged at the branch point");
  return v;
}

Verdict criterion9() {
  Verdict v;
  v.passed = true;
  std::vector<EdgePoint> points;
  std::uint64_t seed = 1009;
  for (const int n : {128, 256, 512}) {
    const double eps = kEdgeWindowScale / std::sqrt(static_cast<double>(n));
    // Expected edge eigenvalues per sample from the finite-N density, plus 10%.
    const double per_sample = n * simpson([&](double r) { return 2.0 * kPi * r * ginibre_density_finite_N(r, n); },
                                          1.0 - eps, 1.0 + eps);
    const auto m = static_cast<std::int64_t>(std::ceil(1.1 * 2000.0 / per_sample));
    EdgeWindow w{eps};
    for_each_sample(product_of({kGinibre}, n), SeedPolicy{seed++}, m, g_workers,
                    [&](const SampleResult& s) { w.accumulate(s.records); });
    if (w.count < 2000) v.passed = false;
    points.push_back({n, w.mean()});
    v.details.push_back("N=" + std::to_string(n) + ": M=" + std::to_string(m) + ", " + std::to_string(w.count) +
                        " edge eigenvalues, mean O_ii " + num(w.mean()) + " (asymptotic " +
                        num(edge_overlap_asymptotic(n)) + ")");
  }
  const auto fit = edge_scaling_fit(points);
  const double target = std::sqrt(2.0 / kPi);
  const double rel = std::abs(fit.slope / target - 1.0);
  v.passed = v.passed && rel <= 0.15;
  v.headline = "slope " + num(fit.slope) + " +/- " + num(fit.slope_se, 2) + " vs sqrt(2/pi) = " + num(target) +
               " (rel " + num(rel, 3) + ", tol 0.15)";
  v.details.push_back("intercept " + num(fit.intercept) + " +/- " + num(fit.intercept_se, 2) + ", window |r-1| <= " +
                      num(kEdgeWindowScale) + "/sqrt(N)");
  return v;
}

Verdict criterion10() {
  const auto start = std::chrono::steady_clock::now();
  const auto checks = run_oracle();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Verdict v;
  int failed = 0;
  for (const auto& c : checks) {
    if (c.passed) continue;
    ++failed;
    v.details.push_back("failed: " + c.name + " expected " + num(c.expected, 8) + " actual " + num(c.actual, 8));
  }
  v.passed = failed == 0 && seconds < 60.0;
  v.headline = std::to_string(checks.size() - failed) + "/" + std::to_string(checks.size()) + " checks in " +
               num(seconds, 3) + " s (limit 60 s)";
  return v;
}

struct Criterion {
  int id;
  const char* title;
  Verdict (*run)();
};

constexpr Criterion kCriteria[] = {
    {1, "Ginibre correlator", criterion1},
    {2, "product of two Ginibres", criterion2},
    {3, "truncated unitary", criterion3},
    {4, "spherical conditioning", criterion4},
    {5, "sum of two Haar unitaries", criterion5},
    {6, "finite-N condition numbers", criterion6},
    {7, "solver exactness", criterion7},
    {8, "mapping round trip", criterion8},
    {9, "edge scaling", criterion9},
    {10, "invariant suite", criterion10},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  g_workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only.push_back(std::atoi(argv[++i]));
    } else if (a == "--workers" && i + 1 < argc) {
      g_workers = std::max(1, std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: acceptance [--only N]... [--workers W]\n";
      return 2;
    }
  }
  int failures = 0;
  for (const auto& c : kCriteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.passed = false;
      v.headline = std::string("error: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << c.id << ": " << (v.passed ? "PASS" : "FAIL") << "  " << c.title << ": " << v.headline
              << "  [" << num(seconds, 3) << " s]\n";
    for (const auto& d : v.details) std::cout << "    " << d << '\n';
    std::cout.flush();
    if (!v.passed) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ringcorr/singlering.hpp"
#include "ringcorr/spectral.hpp"

namespace ringcorr {

/// Strictly increasing bin edges over |lambda|.
class RadialGrid {
 public:
  explicit RadialGrid(std::vector<double> edges);

  static RadialGrid uniform(double lo, double hi, int bins);
  static RadialGrid log_spaced(double lo, double hi, int bins);
  /// 40 uniform bins over [max(0, r_min - 0.1), r_max + 0.1] for bounded
  /// support; log-spaced bins covering F in [0.005, 0.995] otherwise.
  static RadialGrid default_for(const AnalyticModel& model, int bins = 40);

  int bins() const { return static_cast<int>(edges_.size()) - 1; }
  const std::vector<double>& edges() const { return edges_; }
  double lo(int b) const { return edges_[static_cast<std::size_t>(b)]; }
  double hi(int b) const { return edges_[static_cast<std::size_t>(b) + 1]; }
  double mid(int b) const { return 0.5 * (lo(b) + hi(b)); }
  double area(int b) const;

  /// Bin index of radius r; -1 below the grid, bins() at or above the top edge.
  int locate(double r) const;

 private:
  std::vector<double> edges_;
};

/// Finalized per-bin estimates. Standard errors are NaN until computed.
struct BinEstimate {
  double r_lo = 0.0;
  double r_hi = 0.0;
  double r_mid = 0.0;
  std::int64_t count = 0;
  double rho_hat = 0.0;
  double rho_se = std::numeric_limits<double>::quiet_NaN();
  double overlap_hat = 0.0;
  double overlap_se = std::numeric_limits<double>::quiet_NaN();
  /// Mean of O_ii / N over the bin; NaN for empty bins.
  double c_hat = std::numeric_limits<double>::quiet_NaN();
  double c_se = std::numeric_limits<double>::quiet_NaN();
};

/// Running sums for the radial histogram of one ensemble. Each accumulate()
/// call is one accepted sample; samples are the independent unit for errors.
/// Profiles built from disjoint sample sets merge by addition.
class RadialProfile {
 public:
  RadialProfile(RadialGrid grid, int n);

  void accumulate(std::span<const OverlapRecord> records);
  void merge(const RadialProfile& other);
  void add_rejected(std::int64_t count) { rejected_ += count; }

  const RadialGrid& grid() const { return grid_; }
  int dimension() const { return n_; }
  std::int64_t samples() const { return samples_; }
  std::int64_t rejected() const { return rejected_; }
  std::int64_t below_count() const { return below_count_; }
  std::int64_t above_count() const { return above_count_; }
  double below_overlap_sum() const { return below_overlap_; }
  double above_overlap_sum() const { return above_overlap_; }
  std::int64_t count(int b) const { return count_[static_cast<std::size_t>(b)]; }
  double overlap_sum(int b) const { return overlap_[static_cast<std::size_t>(b)]; }

  /// Point estimates; standard errors left as NaN.
  std::vector<BinEstimate> finalize() const;

 private:
  friend std::vector<BinEstimate> standard_errors(const RadialProfile& profile);

  RadialGrid grid_;
  int n_;
  std::int64_t samples_ = 0;
  std::int64_t rejected_ = 0;
  std::int64_t below_count_ = 0;
  std::int64_t above_count_ = 0;
  double below_overlap_ = 0.0;
  double above_overlap_ = 0.0;
  std::vector<std::int64_t> count_;
  std::vector<double> overlap_;
  // Running means and centered (co)moments of the per-sample bin sums, updated
  // one sample at a time and combined pairwise on merge. Identical samples give
  // exactly zero spread, which the raw sum-of-squares form does not.
  struct Moments {
    double mean_count = 0.0;
    double mean_overlap = 0.0;
    double m2_count = 0.0;
    double m2_overlap = 0.0;
    double co = 0.0;
  };
  std::vector<Moments> moments_;
};

/// finalize() plus standard errors from the across-sample variance of the
/// per-sample bin sums. Throws Error(InsufficientSamples) when M < 2.
std::vector<BinEstimate> standard_errors(const RadialProfile& profile);

struct CompareOptions {
  /// Edge exclusion width is c_edge / sqrt(N).
  double c_edge = 3.0;
  /// Explicit bulk bounds replace the edge-derived bound on that side.
  std::optional<double> bulk_lo;
  std::optional<double> bulk_hi;
};

struct BinComparison {
  BinEstimate estimate;
  double rho_analytic = 0.0;
  double overlap_analytic = 0.0;
  double c_analytic = std::numeric_limits<double>::quiet_NaN();
  bool in_bulk = false;
};

struct ComparisonReport {
  int n = 0;
  std::int64_t samples = 0;
  std::int64_t rejected = 0;
  double bulk_lo = 0.0;
  double bulk_hi = 0.0;
  std::vector<BinComparison> bins;
  int bulk_bins = 0;
  double bulk_sup_err_overlap = 0.0;
  double bulk_l2_err_overlap = 0.0;
  double bulk_sup_err_rho = 0.0;
  double bulk_l2_err_rho = 0.0;
  double bulk_sup_err_c = 0.0;
  /// Outside the bulk; reported, never judged.
  double edge_sup_err_overlap = 0.0;
  double edge_sup_err_rho = 0.0;
};

/// Evaluates the model at bin midpoints and computes bulk error norms
/// (sup and root-mean-square over bulk bins). Throws Error(EmptyBulk) when no
/// bin lies fully inside the bulk window.
ComparisonReport compare(std::span<const BinEstimate> rows, int n, std::int64_t samples, std::int64_t rejected,
                         const AnalyticModel& model, const CompareOptions& options = {});
ComparisonReport compare(const RadialProfile& profile, const AnalyticModel& model, const CompareOptions& options = {});

/// Column order: r_lo, r_hi, r_mid, count, rho_hat, rho_se, rho_analytic,
/// O_hat, O_se, O_analytic, c_hat, c_analytic, in_bulk.
void write_report_csv(std::ostream& os, const ComparisonReport& report);

/// Sum and count of O_ii over eigenvalues with ||lambda| - 1| <= eps.
struct EdgeWindow {
  double eps = 0.0;
  double overlap_sum = 0.0;
  std::int64_t count = 0;

  void accumulate(std::span<const OverlapRecord> records);
  double mean() const { return count > 0 ? overlap_sum / static_cast<double>(count) : 0.0; }
};

struct EdgePoint {
  int n = 0;
  double mean_overlap = 0.0;
};

struct EdgeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
};

/// Least squares of mean edge overlap against sqrt(N). Needs >= 3 distinct N.
EdgeFit edge_scaling_fit(std::span<const EdgePoint> points);

/// Default half-width of the edge window, in units of N^{-1/2}. Wider windows
/// average over the steep inner slope of E(O_ii | r) and bias the edge value.
inline constexpr double kEdgeWindowScale = 0.1;

}  // namespace ringcorr

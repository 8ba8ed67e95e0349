#include "ringcorr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "ringcorr/errors.hpp"

namespace ringcorr {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

RadialGrid::RadialGrid(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "radial grid needs at least one bin");
  }
  if (edges_.front() < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "radial grid edges must be nonnegative");
  }
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (!(edges_[i] > edges_[i - 1]) || !std::isfinite(edges_[i])) {
      throw Error(ErrorCode::InvalidArgument, "radial grid edges must be finite and strictly increasing");
    }
  }
}

RadialGrid RadialGrid::uniform(double lo, double hi, int bins) {
  if (bins < 1 || !(hi > lo)) throw Error(ErrorCode::InvalidArgument, "uniform grid needs bins >= 1 and hi > lo");
  std::vector<double> e(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) e[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / bins;
  e.back() = hi;
  return RadialGrid(std::move(e));
}

RadialGrid RadialGrid::log_spaced(double lo, double hi, int bins) {
  if (bins < 1 || !(lo > 0.0) || !(hi > lo)) {
    throw Error(ErrorCode::InvalidArgument, "log grid needs bins >= 1 and 0 < lo < hi");
  }
  std::vector<double> e(static_cast<std::size_t>(bins) + 1);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i <= bins; ++i) e[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / bins);
  e.front() = lo;
  e.back() = hi;
  return RadialGrid(std::move(e));
}

RadialGrid RadialGrid::default_for(const AnalyticModel& model, int bins) {
  const auto& sup = model.support();
  if (std::isfinite(sup.r_max)) {
    return uniform(std::max(0.0, sup.r_min - 0.1), sup.r_max + 0.1, bins);
  }
  // Unbounded support: bracket the radii where F = 0.005 and F = 0.995.
  auto radius_at = [&](double p) {
    double lo = std::max(sup.r_min, 1e-12);
    double hi = std::max(1.0, 2.0 * lo);
    while (radial_cdf(model, hi) < p && hi < 1e12) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(lo * hi);
      (radial_cdf(model, mid) < p ? lo : hi) = mid;
    }
    return std::sqrt(lo * hi);
  };
  return log_spaced(radius_at(0.005), radius_at(0.995), bins);
}

double RadialGrid::area(int b) const {
  const double a = lo(b);
  const double c = hi(b);
  return kPi * (c * c - a * a);
}

int RadialGrid::locate(double r) const {
  if (r < edges_.front()) return -1;
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), r);
  return static_cast<int>(it - edges_.begin()) - 1;
}

RadialProfile::RadialProfile(RadialGrid grid, int n) : grid_(std::move(grid)), n_(n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "profile dimension must be >= 1");
  const auto b = static_cast<std::size_t>(grid_.bins());
  count_.assign(b, 0);
  overlap_.assign(b, 0.0);
  moments_.assign(b, Moments{});
}

void RadialProfile::accumulate(std::span<const OverlapRecord> records) {
  const auto nb = static_cast<std::size_t>(grid_.bins());
  std::vector<std::int64_t> c(nb, 0);
  std::vector<double> o(nb, 0.0);
  for (const auto& rec : records) {
    const int b = grid_.locate(std::abs(rec.eigenvalue));
    if (b < 0) {
      ++below_count_;
      below_overlap_ += rec.overlap;
    } else if (b >= grid_.bins()) {
      ++above_count_;
      above_overlap_ += rec.overlap;
    } else {
      ++c[static_cast<std::size_t>(b)];
      o[static_cast<std::size_t>(b)] += rec.overlap;
    }
  }
  ++samples_;
  const auto m = static_cast<double>(samples_);
  for (std::size_t b = 0; b < nb; ++b) {
    count_[b] += c[b];
    overlap_[b] += o[b];
    auto& mo = moments_[b];
    const double dx = static_cast<double>(c[b]) - mo.mean_count;
    const double dy = o[b] - mo.mean_overlap;
    mo.mean_count += dx / m;
    mo.mean_overlap += dy / m;
    mo.m2_count += dx * (static_cast<double>(c[b]) - mo.mean_count);
    mo.m2_overlap += dy * (o[b] - mo.mean_overlap);
    mo.co += dx * (o[b] - mo.mean_overlap);
  }
}

void RadialProfile::merge(const RadialProfile& other) {
  if (other.n_ != n_ || other.grid_.edges() != grid_.edges()) {
    throw Error(ErrorCode::InvalidArgument, "cannot merge profiles with different N or grids");
  }
  const auto na = static_cast<double>(samples_);
  const auto nb = static_cast<double>(other.samples_);
  samples_ += other.samples_;
  rejected_ += other.rejected_;
  below_count_ += other.below_count_;
  above_count_ += other.above_count_;
  below_overlap_ += other.below_overlap_;
  above_overlap_ += other.above_overlap_;
  for (std::size_t b = 0; b < count_.size(); ++b) {
    count_[b] += other.count_[b];
    overlap_[b] += other.overlap_[b];
    if (nb == 0.0) continue;
    auto& a = moments_[b];
    const auto& o = other.moments_[b];
    const double w = na * nb / (na + nb);
    const double dx = o.mean_count - a.mean_count;
    const double dy = o.mean_overlap - a.mean_overlap;
    a.mean_count += dx * nb / (na + nb);
    a.mean_overlap += dy * nb / (na + nb);
    a.m2_count += o.m2_count + dx * dx * w;
    a.m2_overlap += o.m2_overlap + dy * dy * w;
    a.co += o.co + dx * dy * w;
  }
}

std::vector<BinEstimate> RadialProfile::finalize() const {
  std::vector<BinEstimate> rows;
  rows.reserve(count_.size());
  const double n = n_;
  const auto m = static_cast<double>(samples_);
  for (int b = 0; b < grid_.bins(); ++b) {
    const auto k = static_cast<std::size_t>(b);
    BinEstimate e;
    e.r_lo = grid_.lo(b);
    e.r_hi = grid_.hi(b);
    e.r_mid = grid_.mid(b);
    e.count = count_[k];
    const double area = grid_.area(b);
    if (samples_ > 0) {
      e.rho_hat = static_cast<double>(count_[k]) / (n * m * area);
      e.overlap_hat = overlap_[k] / (n * n * m * area);
    }
    if (count_[k] > 0) e.c_hat = overlap_[k] / (n * static_cast<double>(count_[k]));
    rows.push_back(e);
  }
  return rows;
}

std::vector<BinEstimate> standard_errors(const RadialProfile& profile) {
  if (profile.samples_ < 2) {
    throw Error(ErrorCode::InsufficientSamples, "standard errors need at least 2 samples");
  }
  auto rows = profile.finalize();
  const double n = profile.n_;
  const auto m = static_cast<double>(profile.samples_);
  for (int b = 0; b < profile.grid_.bins(); ++b) {
    const auto k = static_cast<std::size_t>(b);
    const double area = profile.grid_.area(b);
    const auto sx = static_cast<double>(profile.count_[k]);
    const double sy = profile.overlap_[k];
    const auto& mo = profile.moments_[k];
    const double var_x = mo.m2_count / (m - 1.0);
    const double var_y = mo.m2_overlap / (m - 1.0);
    const double cov_xy = mo.co / (m - 1.0);
    auto& e = rows[k];
    e.rho_se = std::sqrt(var_x / m) / (n * area);
    e.overlap_se = std::sqrt(var_y / m) / (n * n * area);
    if (sx > 0.0) {
      // Delta method for the ratio of means.
      const double mean_x = sx / m;
      const double ratio = sy / sx;
      const double var_ratio = std::max(0.0, var_y - 2.0 * ratio * cov_xy + ratio * ratio * var_x) / (m * mean_x * mean_x);
      e.c_se = std::sqrt(var_ratio) / n;
    }
  }
  return rows;
}

ComparisonReport compare(std::span<const BinEstimate> rows, int n, std::int64_t samples, std::int64_t rejected,
                         const AnalyticModel& model, const CompareOptions& options) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "compare needs N >= 1");
  ComparisonReport rep;
  rep.n = n;
  rep.samples = samples;
  rep.rejected = rejected;
  const auto& sup = model.support();
  const double delta = options.c_edge / std::sqrt(static_cast<double>(n));
  rep.bulk_lo = options.bulk_lo ? *options.bulk_lo : sup.r_min + delta;
  rep.bulk_hi = options.bulk_hi ? *options.bulk_hi : sup.r_max - delta;

  double sum_sq_o = 0.0;
  double sum_sq_rho = 0.0;
  for (const auto& row : rows) {
    BinComparison bc;
    bc.estimate = row;
    const double r = row.r_mid;
    if (r > 0.0) {
      bc.rho_analytic = radial_density(model, r);
      bc.overlap_analytic = overlap_correlator(model, r);
      if (bc.rho_analytic > 0.0) bc.c_analytic = bc.overlap_analytic / bc.rho_analytic;
    } else {
      bc.rho_analytic = kNaN;
      bc.overlap_analytic = kNaN;
    }
    // Slack absorbs roundoff in generated grid edges (0.1 * 7 > 0.7).
    constexpr double kSlack = 1e-12;
    bc.in_bulk = r > 0.0 && row.r_lo >= rep.bulk_lo - kSlack && row.r_hi <= rep.bulk_hi + kSlack;

    const double err_o = std::abs(row.overlap_hat - bc.overlap_analytic);
    const double err_rho = std::abs(row.rho_hat - bc.rho_analytic);
    if (bc.in_bulk) {
      ++rep.bulk_bins;
      rep.bulk_sup_err_overlap = std::max(rep.bulk_sup_err_overlap, err_o);
      rep.bulk_sup_err_rho = std::max(rep.bulk_sup_err_rho, err_rho);
      sum_sq_o += err_o * err_o;
      sum_sq_rho += err_rho * err_rho;
      if (std::isfinite(bc.c_analytic) && std::isfinite(row.c_hat)) {
        rep.bulk_sup_err_c = std::max(rep.bulk_sup_err_c, std::abs(row.c_hat - bc.c_analytic));
      }
    } else if (std::isfinite(err_o)) {
      rep.edge_sup_err_overlap = std::max(rep.edge_sup_err_overlap, err_o);
      rep.edge_sup_err_rho = std::max(rep.edge_sup_err_rho, err_rho);
    }
    rep.bins.push_back(bc);
  }
  if (rep.bulk_bins == 0) {
    std::ostringstream os;
    os << "no bin lies fully inside the bulk window [" << rep.bulk_lo << ", " << rep.bulk_hi << "]";
    throw Error(ErrorCode::EmptyBulk, os.str());
  }
  rep.bulk_l2_err_overlap = std::sqrt(sum_sq_o / rep.bulk_bins);
  rep.bulk_l2_err_rho = std::sqrt(sum_sq_rho / rep.bulk_bins);
  return rep;
}

ComparisonReport compare(const RadialProfile& profile, const AnalyticModel& model, const CompareOptions& options) {
  const auto rows = profile.samples() >= 2 ? standard_errors(profile) : profile.finalize();
  return compare(rows, profile.dimension(), profile.samples(), profile.rejected(), model, options);
}

void write_report_csv(std::ostream& os, const ComparisonReport& report) {
  os << "r_lo,r_hi,r_mid,count,rho_hat,rho_se,rho_analytic,O_hat,O_se,O_analytic,c_hat,c_analytic,in_bulk\n";
  const auto old_precision = os.precision();
  os << std::setprecision(17);
  for (const auto& bc : report.bins) {
    const auto& e = bc.estimate;
    os << e.r_lo << ',' << e.r_hi << ',' << e.r_mid << ',' << e.count << ',' << e.rho_hat << ',' << e.rho_se << ','
       << bc.rho_analytic << ',' << e.overlap_hat << ',' << e.overlap_se << ',' << bc.overlap_analytic << ','
       << e.c_hat << ',' << bc.c_analytic << ',' << (bc.in_bulk ? 1 : 0) << '\n';
  }
  os.precision(old_precision);
}

void EdgeWindow::accumulate(std::span<const OverlapRecord> records) {
  for (const auto& rec : records) {
    if (std::abs(std::abs(rec.eigenvalue) - 1.0) <= eps) {
      overlap_sum += rec.overlap;
      ++count;
    }
  }
}

EdgeFit edge_scaling_fit(std::span<const EdgePoint> points) {
  std::set<int> distinct;
  for (const auto& p : points) distinct.insert(p.n);
  if (distinct.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "edge scaling fit needs at least 3 distinct N");
  }
  const auto m = static_cast<double>(points.size());
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& p : points) {
    sx += std::sqrt(static_cast<double>(p.n));
    sy += p.mean_overlap;
  }
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : points) {
    const double dx = std::sqrt(static_cast<double>(p.n)) - mx;
    sxx += dx * dx;
    sxy += dx * (p.mean_overlap - my);
  }
  EdgeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (const auto& p : points) {
    const double res = p.mean_overlap - fit.intercept - fit.slope * std::sqrt(static_cast<double>(p.n));
    rss += res * res;
  }
  const double sigma2 = points.size() > 2 ? rss / (m - 2.0) : 0.0;
  fit.slope_se = std::sqrt(sigma2 / sxx);
  fit.intercept_se = std::sqrt(sigma2 * (1.0 / m + mx * mx / sxx));
  return fit;
}

}  // namespace ringcorr

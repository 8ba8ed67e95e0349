#include "ringcorr/singlering.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include "ringcorr/errors.hpp"
#include "ringcorr/incomplete_gamma.hpp"

namespace ringcorr {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

// Golden-section maximization of f on [a, b].
double golden_max(const std::function<double(double)>& f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::GinibreProduct: return "ginibre_product";
    case ModelKind::TruncatedHaarProduct: return "truncated_haar_product";
    case ModelKind::SphericalProduct: return "spherical_product";
    case ModelKind::HaarSum: return "haar_sum";
    case ModelKind::CustomS: return "custom_s";
  }
  return "unknown";
}

AnalyticModel AnalyticModel::ginibre_product(int n) {
  require(n >= 1, "ginibre_product needs n >= 1");
  AnalyticModel m;
  m.kind_ = ModelKind::GinibreProduct;
  m.order_ = n;
  m.s_ = [n](double z) { return std::pow(1.0 + z, -n); };
  m.support_ = {0.0, 1.0};
  return m;
}

AnalyticModel AnalyticModel::truncated_haar_product(int n, double kappa) {
  require(n >= 1, "truncated_haar_product needs n >= 1");
  require(kappa > 0.0 && std::isfinite(kappa), "truncated_haar_product needs kappa > 0");
  AnalyticModel m;
  m.kind_ = ModelKind::TruncatedHaarProduct;
  m.order_ = n;
  m.kappa_ = kappa;
  m.s_ = [n, kappa](double z) { return std::pow((1.0 + kappa + z) / (1.0 + z), n); };
  m.support_ = {0.0, std::pow(1.0 + kappa, -0.5 * n)};
  return m;
}

AnalyticModel AnalyticModel::spherical_product(int k) {
  require(k >= 1, "spherical_product needs k >= 1");
  AnalyticModel m;
  m.kind_ = ModelKind::SphericalProduct;
  m.order_ = k;
  m.s_ = [k](double z) { return std::pow(-z / (1.0 + z), k); };
  m.support_ = {0.0, kInf};
  return m;
}

AnalyticModel AnalyticModel::haar_sum(int k) {
  require(k >= 1, "haar_sum needs k >= 1");
  AnalyticModel m;
  m.kind_ = ModelKind::HaarSum;
  m.order_ = k;
  const double kk = k;
  m.s_ = [kk](double z) { return (kk + z) / (kk * kk * (1.0 + z)); };
  // k = 1 is a single Haar unitary: the whole spectrum sits on |z| = 1.
  m.support_ = {k == 1 ? 1.0 : 0.0, std::sqrt(kk)};
  return m;
}

AnalyticModel AnalyticModel::custom(STransform s, std::string label) {
  require(static_cast<bool>(s), "custom model needs an S-transform");
  AnalyticModel m;
  m.kind_ = ModelKind::CustomS;
  m.s_ = std::move(s);
  m.support_ = ring_radii(m.s_);
  m.label_ = std::move(label);
  return m;
}

std::string AnalyticModel::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case ModelKind::GinibreProduct: os << "ginibre_product(n=" << order_ << ")"; break;
    case ModelKind::TruncatedHaarProduct: os << "truncated_haar_product(n=" << order_ << ", kappa=" << kappa_ << ")"; break;
    case ModelKind::SphericalProduct: os << "spherical_product(k=" << order_ << ")"; break;
    case ModelKind::HaarSum: os << "haar_sum(k=" << order_ << ")"; break;
    case ModelKind::CustomS: os << label_; break;
  }
  return os.str();
}

double radial_cdf(const AnalyticModel& model, double r) {
  require(r >= 0.0, "radial_cdf needs r >= 0");
  const auto& sup = model.support();
  if (r <= sup.r_min) return 0.0;
  if (r >= sup.r_max) return 1.0;

  const double n = model.order();
  switch (model.kind()) {
    case ModelKind::GinibreProduct: return std::pow(r, 2.0 / n);
    case ModelKind::TruncatedHaarProduct: {
      const double t = std::pow(r, 2.0 / n);
      return std::min(1.0, model.kappa() * t / (1.0 - t));
    }
    case ModelKind::SphericalProduct: {
      const double t = std::pow(r, 2.0 / n);
      return t / (1.0 + t);
    }
    case ModelKind::HaarSum: {
      const double r2 = r * r;
      return std::min(1.0, r2 * (n - 1.0) / (n * n - r2));
    }
    case ModelKind::CustomS: return solve_hl(model.s_transform(), r);
  }
  return 0.0;
}

double solve_hl(const STransform& s, double r) {
  require(r > 0.0, "solve_hl needs r > 0");
  const double target = 1.0 / (r * r);
  // g(F) = S(F - 1) - 1/r^2; S(-1) may be +inf, which still fixes the sign.
  auto g = [&](double f) { return s(f - 1.0) - target; };

  double lo = 0.0;
  double hi = 1.0;
  double g_lo = g(lo);
  double g_hi = g(hi);
  if (std::isnan(g_lo)) g_lo = g(lo = 1e-15);
  if (std::isnan(g_hi)) g_hi = g(hi = 1.0 - 1e-15);
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  if (std::isnan(g_lo) || std::isnan(g_hi) || (g_lo > 0.0) == (g_hi > 0.0)) {
    std::ostringstream os;
    os << "S(F-1) - 1/r^2 has no sign change on [0,1] at r=" << r;
    throw Error(ErrorCode::NotBracketed, os.str());
  }
  const bool lo_positive = g_lo > 0.0;
  for (int it = 0; it < 200 && hi - lo > 2e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm > 0.0) == lo_positive) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

enum class Limit { Finite, Infinite, Zero };

// Limit of S toward an endpoint, sampled at endpoint + dir*h.
std::pair<Limit, double> endpoint_limit(const STransform& s, double endpoint, double dir) {
  const double h1 = 1e-4;
  const double h2 = 1e-8;
  const double v1 = s(endpoint + dir * h1);
  const double v2 = s(endpoint + dir * h2);
  if (!std::isfinite(v2) || (v2 > 1e6 && v2 > 100.0 * v1)) return {Limit::Infinite, kInf};
  if (v2 <= 1e-300 || (v2 < 1e-6 && v2 < 1e-2 * v1)) return {Limit::Zero, 0.0};
  // Richardson on the linear term.
  const double a = s(endpoint + dir * 2e-6);
  const double b = s(endpoint + dir * 1e-6);
  return {Limit::Finite, 2.0 * b - a};
}

}  // namespace

RingSupport ring_radii(const STransform& s) {
  RingSupport sup;
  const auto [lim_hi, s_zero] = endpoint_limit(s, 0.0, -1.0);
  const auto [lim_lo, s_minus_one] = endpoint_limit(s, -1.0, +1.0);

  switch (lim_hi) {
    case Limit::Zero: sup.r_max = kInf; break;
    case Limit::Infinite: sup.r_max = 0.0; break;
    case Limit::Finite: sup.r_max = 1.0 / std::sqrt(s_zero); break;
  }
  switch (lim_lo) {
    case Limit::Infinite: sup.r_min = 0.0; break;
    case Limit::Zero: sup.r_min = kInf; break;
    case Limit::Finite: sup.r_min = 1.0 / std::sqrt(s_minus_one); break;
  }
  return sup;
}

double overlap_correlator(const AnalyticModel& model, double r) {
  require(r > 0.0, "overlap_correlator needs r > 0");
  const double f = radial_cdf(model, r);
  return f * (1.0 - f) / (kPi * r * r);
}

double radial_density(const AnalyticModel& model, double r) {
  require(r > 0.0, "radial_density needs r > 0");
  const auto& sup = model.support();
  if (r < sup.r_min || r >= sup.r_max) return 0.0;

  const double n = model.order();
  switch (model.kind()) {
    case ModelKind::GinibreProduct: return std::pow(r, 2.0 / n - 2.0) / (kPi * n);
    // r^{2/n - 2} taken in one power so tiny r does not turn into 0/0.
    case ModelKind::TruncatedHaarProduct: {
      const double t = std::pow(r, 2.0 / n);
      return model.kappa() * std::pow(r, 2.0 / n - 2.0) / (kPi * n * (1.0 - t) * (1.0 - t));
    }
    case ModelKind::SphericalProduct: {
      const double t = std::pow(r, 2.0 / n);
      return std::pow(r, 2.0 / n - 2.0) / (kPi * n * (1.0 + t) * (1.0 + t));
    }
    case ModelKind::HaarSum: {
      if (model.order() == 1) return 0.0;
      const double d = n * n - r * r;
      return n * n * (n - 1.0) / (kPi * d * d);
    }
    case ModelKind::CustomS: {
      const double h = 1e-6 * r;
      const double df = radial_cdf(model, r + h) - radial_cdf(model, r - h);
      return df / (2.0 * h) / (2.0 * kPi * r);
    }
  }
  return 0.0;
}

double conditional_kappa2(const AnalyticModel& model, double r) {
  const double rho = radial_density(model, r);
  if (!(rho > 0.0)) {
    std::ostringstream os;
    os << "density vanishes at r=" << r << " for " << model.describe();
    throw Error(ErrorCode::DivisionOutsideSupport, os.str());
  }
  return overlap_correlator(model, r) / rho;
}

double ginibre_condnum_finite_N(double r, int n) {
  require(n >= 1 && r >= 0.0, "ginibre_condnum_finite_N needs N >= 1, r >= 0");
  const double x = n * r * r;
  if (x == 0.0) return 1.0;
  // e^{-x} x^N / Gamma(N, x) = prefactor / Q with prefactor = x^N e^{-x} / Gamma(N).
  const auto g = gamma::incomplete_gamma(n, x);
  const double correction = std::isinf(g.upper_over_prefactor) ? 0.0 : 1.0 / (n * g.upper_over_prefactor);
  return 1.0 - r * r + correction;
}

double ginibre_density_finite_N(double r, int n) {
  require(n >= 1 && r >= 0.0, "ginibre_density_finite_N needs N >= 1, r >= 0");
  return gamma::gamma_q(n, n * r * r) / kPi;
}

double edge_overlap_asymptotic(int n) {
  require(n >= 1, "edge_overlap_asymptotic needs N >= 1");
  return std::sqrt(2.0 / kPi) * std::sqrt(static_cast<double>(n)) + 2.0 / (3.0 * kPi);
}

double cdf_from_overlap(double r, double overlap, Branch branch) {
  require(r >= 0.0 && overlap >= 0.0, "cdf_from_overlap needs r >= 0, O >= 0");
  double disc = 1.0 - 4.0 * kPi * r * r * overlap;
  if (disc < -1e-6) {
    std::ostringstream os;
    os << "4 pi r^2 O = " << 1.0 - disc << " exceeds 1 at r=" << r;
    throw Error(ErrorCode::OutOfRange, os.str());
  }
  disc = std::max(disc, 0.0);
  const double root = std::sqrt(disc);
  return branch == Branch::Lower ? 0.5 * (1.0 - root) : 0.5 * (1.0 + root);
}

DensityFromOverlap density_from_overlap(double r, double overlap, double overlap_derivative, Branch branch) {
  const double disc = 1.0 - 4.0 * kPi * r * r * overlap;
  if (std::abs(disc) < 1e-10) {
    return {std::numeric_limits<double>::quiet_NaN(), true};
  }
  if (disc < 0.0) {
    std::ostringstream os;
    os << "4 pi r^2 O = " << 1.0 - disc << " exceeds 1 at r=" << r;
    throw Error(ErrorCode::OutOfRange, os.str());
  }
  const double magnitude = (2.0 * overlap + r * overlap_derivative) / (2.0 * std::sqrt(disc));
  return {branch == Branch::Lower ? magnitude : -magnitude, false};
}

double locate_branch_switch(const std::function<double(double)>& overlap, double r_lo, double r_hi) {
  require(r_hi > r_lo && r_lo >= 0.0, "locate_branch_switch needs 0 <= r_lo < r_hi");
  auto q = [&](double r) { return 4.0 * kPi * r * r * overlap(r); };
  constexpr int kGrid = 2000;
  const double step = (r_hi - r_lo) / kGrid;
  int best = 0;
  double best_val = -kInf;
  for (int i = 0; i <= kGrid; ++i) {
    const double v = q(r_lo + i * step);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double a = r_lo + std::max(0, best - 1) * step;
  const double b = r_lo + std::min(kGrid, best + 1) * step;
  return golden_max(q, a, b);
}

bool branch_point_ambiguous(const std::function<double(double)>& overlap, double r_lo, double r_hi,
                            int grid_points, double tol) {
  require(r_hi > r_lo && grid_points >= 3, "branch_point_ambiguous needs a nondegenerate grid");
  auto q = [&](double r) { return 4.0 * kPi * r * r * overlap(r); };
  const double step = (r_hi - r_lo) / (grid_points - 1);
  std::vector<double> v(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) v[static_cast<std::size_t>(i)] = q(r_lo + i * step);

  int touching = 0;
  bool in_plateau = false;
  for (int i = 1; i + 1 < grid_points; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const bool local_max = v[k] >= v[k - 1] && v[k] >= v[k + 1];
    if (!local_max) {
      in_plateau = false;
      continue;
    }
    if (in_plateau) continue;
    in_plateau = true;
    const double r_star = golden_max(q, r_lo + (i - 1) * step, r_lo + (i + 1) * step);
    if (std::abs(1.0 - q(r_star)) < tol) ++touching;
  }
  return touching > 1;
}

}  // namespace ringcorr

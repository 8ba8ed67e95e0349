#pragma once

#include <functional>
#include <limits>
#include <string>

namespace ringcorr {

/// S-transform of the squared radial part, S_{P^2}(z) for z in (-1, 0).
using STransform = std::function<double(double)>;

/// Annulus containing the limiting spectrum. r_max may be +inf.
struct RingSupport {
  double r_min = 0.0;
  double r_max = std::numeric_limits<double>::infinity();
};

enum class ModelKind { GinibreProduct, TruncatedHaarProduct, SphericalProduct, HaarSum, CustomS };

std::string to_string(ModelKind kind);

/// Limiting radial law of a biunitarily invariant ensemble. The four named
/// families carry closed forms; CustomS goes through the functional equation
/// S(F(r) - 1) = 1/r^2.
class AnalyticModel {
 public:
  /// X_1 ... X_n with Ginibre factors.
  static AnalyticModel ginibre_product(int n);
  /// X_1 ... X_n with truncated Haar factors, kappa = L/N.
  static AnalyticModel truncated_haar_product(int n, double kappa);
  /// X_1 ... X_k Y_1^{-1} ... Y_k^{-1} with Ginibre X_i, Y_i.
  static AnalyticModel spherical_product(int k);
  /// U_1 + ... + U_k with Haar unitaries.
  static AnalyticModel haar_sum(int k);
  /// S must be positive and monotone on (-1, 0).
  static AnalyticModel custom(STransform s, std::string label = "custom_s");

  ModelKind kind() const { return kind_; }
  int order() const { return order_; }
  double kappa() const { return kappa_; }
  const STransform& s_transform() const { return s_; }
  const RingSupport& support() const { return support_; }
  std::string describe() const;

 private:
  AnalyticModel() = default;

  ModelKind kind_ = ModelKind::GinibreProduct;
  int order_ = 1;
  double kappa_ = 0.0;
  STransform s_;
  RingSupport support_;
  std::string label_;
};

/// Radial CDF F(r), clamped to 0 below r_min and 1 above r_max.
double radial_cdf(const AnalyticModel& model, double r);

/// Root F in [0, 1] of S(F - 1) = 1/r^2 by bisection to 1e-12.
/// Throws Error(NotBracketed) when r lies outside the ring.
double solve_hl(const STransform& s, double r);

/// r_max = S(0^-)^{-1/2}, r_min = S(-1^+)^{-1/2}, from endpoint extrapolation.
RingSupport ring_radii(const STransform& s);

/// O(r) = F(1 - F) / (pi r^2). Requires r > 0.
double overlap_correlator(const AnalyticModel& model, double r);

/// rho(r) = F'(r) / (2 pi r); zero outside the ring.
double radial_density(const AnalyticModel& model, double r);

/// c(r) = O(r) / rho(r). Throws Error(DivisionOutsideSupport) where rho = 0.
double conditional_kappa2(const AnalyticModel& model, double r);

/// Finite-N Ginibre conditional mean of O_ii / N at |lambda| = r:
///   1 - r^2 + (1/N) e^{-N r^2} (N r^2)^N / Gamma(N, N r^2)
/// evaluated in log space.
double ginibre_condnum_finite_N(double r, int n);

/// Finite-N Ginibre mean eigenvalue density Q(N, N r^2) / pi.
double ginibre_density_finite_N(double r, int n);

/// sqrt(2/pi) sqrt(N) + 2/(3 pi): leading terms of E(O_ii | |lambda_i| = 1).
double edge_overlap_asymptotic(int n);

enum class Branch { Lower, Upper };

/// F = (1 -/+ sqrt(1 - 4 pi r^2 O)) / 2. Lower (minus) on the inner side of
/// the branch point, Upper on the outer side. Throws Error(OutOfRange) when
/// 4 pi r^2 O > 1 + 1e-6; smaller excesses are clamped.
double cdf_from_overlap(double r, double overlap, Branch branch);

struct DensityFromOverlap {
  double value = 0.0;
  /// Set within 1e-10 of the branch point, where value is NaN.
  bool singular_at_branch_point = false;
};

/// rho = +/- (2 O + r O') / (2 sqrt(1 - 4 pi r^2 O)), sign + on Lower.
DensityFromOverlap density_from_overlap(double r, double overlap, double overlap_derivative, Branch branch);

/// Radius maximizing 4 pi r^2 O(r) on [r_lo, r_hi], i.e. where F = 1/2.
double locate_branch_switch(const std::function<double(double)>& overlap, double r_lo, double r_hi);

/// True when 1 - 4 pi r^2 O(r) comes within tol of zero on more than one
/// separated stretch of a uniform grid over [r_lo, r_hi].
bool branch_point_ambiguous(const std::function<double(double)>& overlap, double r_lo, double r_hi,
                            int grid_points = 2001, double tol = 1e-10);

}  // namespace ringcorr

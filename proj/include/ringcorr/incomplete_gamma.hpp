#pragma once

namespace ringcorr::gamma {

/// Regularized incomplete gamma functions, split into the power series
/// (x < a + 1) and the Lentz continued fraction (x >= a + 1).
struct IncompleteGamma {
  /// P(a, x)
  double lower = 0.0;
  /// Q(a, x) = 1 - P(a, x)
  double upper = 0.0;
  /// x^a e^{-x} / Gamma(a), evaluated in log space. May underflow to 0.
  double prefactor = 0.0;
  /// Q(a, x) / prefactor. Finite on the continued-fraction branch even when
  /// both Q and the prefactor underflow; +inf when the prefactor underflows on
  /// the series branch.
  double upper_over_prefactor = 0.0;
};

/// Requires a > 0, x >= 0.
IncompleteGamma incomplete_gamma(double a, double x);

double gamma_p(double a, double x);
double gamma_q(double a, double x);

}  // namespace ringcorr::gamma

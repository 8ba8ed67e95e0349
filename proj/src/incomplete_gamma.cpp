#include "ringcorr/incomplete_gamma.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ringcorr/errors.hpp"

namespace ringcorr::gamma {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

// sum_{k>=0} x^k / ((a+1)...(a+k)); P(a,x) = prefactor/a * sum.
double lower_series(double a, double x) {
  double ap = a;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < kMaxIter; ++k) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) return sum;
  }
  throw Error(ErrorCode::InvalidArgument, "incomplete gamma series did not converge");
}

// Modified Lentz evaluation of Q(a,x)/prefactor.
double upper_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw Error(ErrorCode::InvalidArgument, "incomplete gamma continued fraction did not converge");
}

// log1p(d) - d without cancellation near d = 0.
double log1pmx(double d) {
  if (std::abs(d) > 0.5) return std::log1p(d) - d;
  double power = d;
  double sum = 0.0;
  for (int k = 2; k < 200; ++k) {
    power *= -d;
    const double term = power / k;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum;
}

// log(x^a e^{-x} / Gamma(a)). For large a the naive form subtracts numbers of
// size a log x and loses digits, so split off Stirling's approximation:
//   a log(x/a) + a - x = a log1pmx((x - a)/a).
double log_prefactor(double a, double x) {
  if (a < 30.0) return a * std::log(x) - x - std::lgamma(a);
  const double ia = 1.0 / a;
  const double ia2 = ia * ia;
  // lgamma(a) - [(a - 1/2) log a - a + log(2 pi)/2]
  const double stirling = ia * (1.0 / 12.0 - ia2 * (1.0 / 360.0 - ia2 * (1.0 / 1260.0 - ia2 / 1680.0)));
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  return a * log1pmx((x - a) / a) + 0.5 * std::log(a) - kHalfLog2Pi - stirling;
}

}  // namespace

IncompleteGamma incomplete_gamma(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    std::ostringstream os;
    os << "incomplete_gamma requires a > 0, x >= 0 (a=" << a << ", x=" << x << ")";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  IncompleteGamma g;
  if (x == 0.0) {
    g.lower = 0.0;
    g.upper = 1.0;
    g.prefactor = 0.0;
    g.upper_over_prefactor = std::numeric_limits<double>::infinity();
    return g;
  }
  g.prefactor = std::exp(log_prefactor(a, x));

  if (x < a + 1.0) {
    g.lower = g.prefactor / a * lower_series(a, x);
    g.upper = 1.0 - g.lower;
    g.upper_over_prefactor =
        g.prefactor > 0.0 ? g.upper / g.prefactor : std::numeric_limits<double>::infinity();
  } else {
    const double h = upper_fraction(a, x);
    g.upper = g.prefactor * h;
    g.lower = 1.0 - g.upper;
    g.upper_over_prefactor = h;
  }
  return g;
}

double gamma_p(double a, double x) { return incomplete_gamma(a, x).lower; }
double gamma_q(double a, double x) { return incomplete_gamma(a, x).upper; }

}  // namespace ringcorr::gamma

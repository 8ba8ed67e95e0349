#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ringcorr/errors.hpp"
#include "ringcorr/experiment.hpp"

namespace ringcorr {

namespace {

constexpr double kPi = std::numbers::pi;

class CheckList {
 public:
  void near(std::string name, double expected, double actual, double tol, std::string detail = {}) {
    const bool ok = std::isfinite(actual) && std::abs(actual - expected) <= tol;
    checks_.push_back({std::move(name), ok, expected, actual, tol, std::move(detail)});
  }
  void at_most(std::string name, double bound, double actual, std::string detail = {}) {
    const bool ok = std::isfinite(actual) && actual <= bound;
    checks_.push_back({std::move(name), ok, bound, actual, 0.0, std::move(detail)});
  }
  void at_least(std::string name, double bound, double actual, std::string detail = {}) {
    const bool ok = std::isfinite(actual) && actual >= bound;
    checks_.push_back({std::move(name), ok, bound, actual, 0.0, std::move(detail)});
  }
  std::vector<OracleCheck> take() { return std::move(checks_); }

 private:
  std::vector<OracleCheck> checks_;
};

void two_by_two_oracle(CheckList& out) {
  // X = [[1, a], [0, 2]]: R_1 = (1, 0), R_2 = (a, 1), L_1 = (1, -a), L_2 = (0, 1),
  // so O_11 = O_22 = 1 + |a|^2.
  for (const cdouble a : {cdouble(2.0, 0.0), cdouble(0.5, -1.5), cdouble(-3.0, 0.25)}) {
    ComplexMatrix x(2, 2);
    x << 1.0, a, 0.0, 2.0;
    const auto records = overlaps_diagonal(eig_full(x));
    const double expected = 1.0 + std::norm(a);
    std::ostringstream os;
    os << "a=" << a;
    for (const auto& r : records) out.near("2x2 overlap oracle O_ii = 1+|a|^2", expected, r.overlap, 1e-12, os.str());
  }
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d.diagonal() << 1.0, 2.0, 3.0;
  double worst = 0.0;
  for (const auto& r : overlaps_diagonal(eig_full(d))) worst = std::max(worst, std::abs(r.overlap - 1.0));
  out.at_most("normal diag(1,2,3): max |O_ii - 1|", 1e-12, worst);
}

void eigensystem_defects(CheckList& out, std::uint64_t seed) {
  const SeedPolicy seeds{seed};
  double worst_offdiag = 0.0;
  double worst_diag = 0.0;
  double worst_reconstruction = 0.0;
  double min_overlap = std::numeric_limits<double>::infinity();
  double worst_scale = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    RandomStream stream = seeds.stream(s);
    const ComplexMatrix x = sample_ginibre(64, stream);
    const EigenSystem es = eig_full(x);
    worst_offdiag = std::max(worst_offdiag, es.biorthogonality_defect);
    worst_diag = std::max(worst_diag, es.diagonal_defect);
    const ComplexMatrix rebuilt = es.right * es.eigenvalues.asDiagonal() * es.left;
    worst_reconstruction =
        std::max(worst_reconstruction, (x - rebuilt).cwiseAbs().maxCoeff() / x.cwiseAbs().maxCoeff());
    const auto records = overlaps_diagonal(es);
    for (const auto& r : records) min_overlap = std::min(min_overlap, r.overlap);
    if (s < 5) {
      // Scale covariance: O_ii of cX equal those of X.
      auto scaled = overlaps_diagonal(eig_full(cdouble(-0.7, 2.1) * x));
      std::vector<double> a;
      std::vector<double> b;
      for (const auto& r : records) a.push_back(r.overlap);
      for (const auto& r : scaled) b.push_back(r.overlap);
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      for (std::size_t i = 0; i < a.size(); ++i) worst_scale = std::max(worst_scale, std::abs(a[i] - b[i]) / a[i]);
    }
  }
  out.at_most("Ginibre N=64 x100: max |<L_i|R_j>| off-diagonal defect", 1e-6, worst_offdiag);
  out.at_most("Ginibre N=64 x100: max |<L_i|R_i> - 1|", 1e-8, worst_diag);
  out.at_most("Ginibre N=64 x100: reconstruction / max|X|", 1e-6, worst_reconstruction);
  out.at_least("Ginibre N=64 x100: min O_ii", 1.0 - 1e-10, min_overlap);
  out.at_most("scale covariance: relative O_ii change under X -> cX", 1e-8, worst_scale);

  RandomStream stream = seeds.stream(1000);
  const ComplexMatrix u = sample_haar_unitary(64, stream);
  double worst_unitary = 0.0;
  for (const auto& r : overlaps_diagonal(eig_full(u))) worst_unitary = std::max(worst_unitary, std::abs(r.overlap - 1.0));
  out.at_most("Haar unitary N=64: max |O_ii - 1|", 1e-8, worst_unitary);
}

void resolvent_identities(CheckList& out, std::uint64_t seed) {
  const cdouble z(0.3, 0.1);
  const cdouble w(0.2, 0.0);
  {
    const auto g = quaternion_resolvent(ComplexMatrix::Zero(4, 4), z, w);
    const double d = std::norm(z) + std::norm(w);
    out.near("X=0: Re G11 = Re conj(z)/(|z|^2+|w|^2)", std::conj(z).real() / d, g.g11.real(), 1e-14);
    out.near("X=0: Im G11 = Im conj(z)/(|z|^2+|w|^2)", std::conj(z).imag() / d, g.g11.imag(), 1e-14);
    out.near("X=0: G12 = conj(w)/(|z|^2+|w|^2)", std::conj(w).real() / d, g.g12.real(), 1e-14);
  }

  RandomStream stream = SeedPolicy{seed}.stream(2000);
  const ComplexMatrix x = sample_ginibre(64, stream);
  double worst_product = 0.0;
  double worst_structure = 0.0;
  for (const cdouble ww : {cdouble(0.2, 0.0), cdouble(0.05, -0.3), cdouble(1e-3, 0.0)}) {
    for (const cdouble zz : {cdouble(0.3, 0.1), cdouble(-0.8, 0.4), cdouble(1.3, -0.2)}) {
      const auto g = quaternion_resolvent(x, zz, ww);
      const double n = static_cast<double>(x.rows());
      const cdouble lhs = -g.g12 * g.g21;
      const double rhs = std::norm(ww) * g.trace_left * g.trace_right / (n * n);
      worst_product = std::max(worst_product, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
      worst_structure = std::max({worst_structure, std::abs(g.g22 - std::conj(g.g11)),
                                  std::abs(g.g21 + std::conj(g.g12)) / std::max(1.0, std::abs(g.g12))});
    }
  }
  out.at_most("block inverse: |-G12 G21 - |w|^2 T1 T2 / N^2|", 1e-10, worst_product);
  out.at_most("quaternion structure: G22 = conj G11, G21 = -conj G12", 1e-10, worst_structure);

  const double h = 1e-4;
  const double d_h = resolvent_symmetry_check(x, z, w, h);
  out.at_most("d_w G11 = d_z G12 at h=1e-4", 1e-5, d_h);
  const double d_coarse = resolvent_symmetry_check(x, z, w, 1e-2);
  const double d_fine = resolvent_symmetry_check(x, z, w, 5e-3);
  out.near("finite-difference order: defect(h)/defect(h/2) at h=1e-2", 4.0, d_coarse / d_fine, 0.5);
}

void analytic_checks(CheckList& out) {
  out.near("Ginibre finite-N condition number N=1, r=0.7", 1.0, ginibre_condnum_finite_N(0.7, 1), 1e-12);
  // Arbitrary-precision references (mpmath, 50 digits).
  out.near("finite-N condition number N=10, r=1", 0.27320794385537411828, ginibre_condnum_finite_N(1.0, 10), 1e-12);
  out.near("finite-N condition number N=2, r=1.5", 0.59090909090909090909, ginibre_condnum_finite_N(1.5, 2), 1e-12);
  out.near("finite-N condition number N=10^4, r=1", 0.0080000562008376196617, ginibre_condnum_finite_N(1.0, 10000), 1e-12);

  const AnalyticModel models[] = {AnalyticModel::ginibre_product(1), AnalyticModel::ginibre_product(2),
                                  AnalyticModel::truncated_haar_product(1, 1.0),
                                  AnalyticModel::truncated_haar_product(3, 0.5), AnalyticModel::spherical_product(1),
                                  AnalyticModel::spherical_product(3), AnalyticModel::haar_sum(2),
                                  AnalyticModel::haar_sum(4)};
  for (const auto& m : models) {
    const auto& sup = m.support();
    const double hi = std::isfinite(sup.r_max) ? sup.r_max : 20.0;
    double worst_solver = 0.0;
    double worst_round_trip = 0.0;
    for (int i = 1; i < 100; ++i) {
      const double r = sup.r_min + (hi - sup.r_min) * i / 100.0;
      const double f = radial_cdf(m, r);
      worst_solver = std::max(worst_solver, std::abs(solve_hl(m.s_transform(), r) - f));
      const Branch b = f < 0.5 ? Branch::Lower : Branch::Upper;
      worst_round_trip = std::max(worst_round_trip, std::abs(cdf_from_overlap(r, overlap_correlator(m, r), b) - f));
    }
    out.at_most("solve_hl vs closed form: " + m.describe(), 1e-9, worst_solver);
    out.at_most("cdf_from_overlap round trip: " + m.describe(), 1e-9, worst_round_trip);
  }

  double worst_density = 0.0;
  for (int i = 1; i < 100; ++i) {
    const double r = i / 100.0;
    const double o = (1.0 - r * r) / kPi;
    const double d_o = -2.0 * r / kPi;
    const auto rho = density_from_overlap(r, o, d_o, r < std::sqrt(0.5) ? Branch::Lower : Branch::Upper);
    if (!rho.singular_at_branch_point) worst_density = std::max(worst_density, std::abs(rho.value - 1.0 / kPi));
  }
  out.at_most("density_from_overlap on Ginibre O(r), both branches", 1e-6, worst_density);
}

void averaged_resolvent(CheckList& out, std::uint64_t seed) {
  constexpr int kN = 512;
  constexpr int kM = 50;
  const cdouble z(0.5, 0.0);
  const cdouble w(1e-3, 0.0);
  const SeedPolicy seeds{seed ^ 0x5eedULL};
  cdouble sum = 0.0;
  for (int s = 0; s < kM; ++s) {
    RandomStream stream = seeds.stream(static_cast<std::uint64_t>(s));
    sum += z * quaternion_resolvent(sample_ginibre(kN, stream), z, w).g11;
  }
  const cdouble mean = sum / static_cast<double>(kM);
  out.near("ensemble mean z G11(z=0.5, |w|=1e-3), N=512, M=50 vs F(0.5)", 0.25, mean.real(), 0.02);
  out.near("ensemble mean Im z G11(z=0.5, |w|=1e-3)", 0.0, mean.imag(), 0.02);
}

}  // namespace

std::vector<OracleCheck> run_oracle(std::uint64_t seed) {
  CheckList out;
  two_by_two_oracle(out);
  eigensystem_defects(out, seed);
  resolvent_identities(out, seed);
  analytic_checks(out);
  averaged_resolvent(out, seed);
  return out.take();
}

}  // namespace ringcorr

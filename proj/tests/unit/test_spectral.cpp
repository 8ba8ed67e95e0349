#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "ringcorr/ensemble.hpp"
#include "ringcorr/errors.hpp"
#include "ringcorr/singlering.hpp"
#include "ringcorr/spectral.hpp"

using namespace ringcorr;

namespace {

std::vector<double> sorted_overlaps(const ComplexMatrix& x) {
  std::vector<double> o;
  for (const auto& r : overlaps_diagonal(eig_full(x))) o.push_back(r.overlap);
  std::sort(o.begin(), o.end());
  return o;
}

// Overlaps from a second, independent route: right vectors of X and left
// vectors as right vectors of X^+, paired by conj eigenvalue and normalized
// so that <L_i|R_i> = 1.
std::vector<double> overlaps_by_two_eigensolves(const ComplexMatrix& x) {
  Eigen::ComplexEigenSolver<ComplexMatrix> right(x);
  Eigen::ComplexEigenSolver<ComplexMatrix> left(x.adjoint());
  std::vector<double> o;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const cdouble lam = right.eigenvalues()(i);
    Eigen::Index best = 0;
    double gap = 1e300;
    for (Eigen::Index j = 0; j < x.rows(); ++j) {
      const double d = std::abs(std::conj(left.eigenvalues()(j)) - lam);
      if (d < gap) gap = d, best = j;
    }
    const Eigen::VectorXcd r = right.eigenvectors().col(i);
    const Eigen::VectorXcd l = left.eigenvectors().col(best);
    const cdouble lr = l.dot(r);  // <L|R>
    o.push_back(l.squaredNorm() * r.squaredNorm() / std::norm(lr));
  }
  std::sort(o.begin(), o.end());
  return o;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no ringcorr::Error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(EigFull, DiagonalMatrix) {
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d.diagonal() << 1.0, 2.0, 3.0;
  const EigenSystem es = eig_full(d);
  std::vector<double> ev;
  for (Eigen::Index i = 0; i < 3; ++i) ev.push_back(es.eigenvalues(i).real());
  std::sort(ev.begin(), ev.end());
  EXPECT_NEAR(ev[0], 1.0, 1e-14);
  EXPECT_NEAR(ev[1], 2.0, 1e-14);
  EXPECT_NEAR(ev[2], 3.0, 1e-14);
  for (const auto& r : overlaps_diagonal(es)) {
    EXPECT_NEAR(r.overlap, 1.0, 1e-12);
    EXPECT_NEAR(r.condition, 1.0, 1e-12);
  }
}

TEST(EigFull, TwoByTwoOracle) {
  for (const cdouble a : {cdouble(2.0, 0.0), cdouble(0.0, 1.0), cdouble(-0.3, 0.7), cdouble(10.0, -4.0)}) {
    ComplexMatrix x(2, 2);
    x << 1.0, a, 0.0, 2.0;
    const auto recs = overlaps_diagonal(eig_full(x));
    ASSERT_EQ(recs.size(), 2u);
    for (const auto& r : recs) EXPECT_NEAR(r.overlap, 1.0 + std::norm(a), 1e-12 * (1.0 + std::norm(a))) << a;
  }
  ComplexMatrix x(2, 2);
  x << 1.0, 2.0, 0.0, 2.0;
  for (const auto& r : overlaps_diagonal(eig_full(x))) EXPECT_NEAR(r.overlap, 5.0, 1e-12);
}

TEST(EigFull, MatchesIndependentEigensolves) {
  RandomStream s(5);
  for (const int n : {2, 5, 20}) {
    const ComplexMatrix x = sample_ginibre(n, s);
    const auto mine = sorted_overlaps(x);
    const auto ref = overlaps_by_two_eigensolves(x);
    for (std::size_t i = 0; i < mine.size(); ++i) EXPECT_NEAR(mine[i], ref[i], 1e-8 * ref[i]) << "N=" << n;
  }
}

TEST(EigFull, HaarUnitaryIsNormal) {
  RandomStream s(6);
  for (const auto& r : overlaps_diagonal(eig_full(sample_haar_unitary(128, s)))) EXPECT_NEAR(r.overlap, 1.0, 1e-8);
}

TEST(EigFull, DiagnosticsOnGinibre) {
  const SeedPolicy seeds{8};
  for (std::uint64_t i = 0; i < 20; ++i) {
    RandomStream s = seeds.stream(i);
    const ComplexMatrix x = sample_ginibre(64, s);
    const EigenSystem es = eig_full(x);
    EXPECT_LE(es.biorthogonality_defect, 1e-6);
    EXPECT_LE(es.diagonal_defect, 1e-8);
    EXPECT_LE(es.residual, 1e-10);
    EXPECT_GE(es.similarity_condition, 1.0);
    const ComplexMatrix rebuilt = es.right * es.eigenvalues.asDiagonal() * es.left;
    EXPECT_LE((x - rebuilt).cwiseAbs().maxCoeff(), 1e-6 * x.cwiseAbs().maxCoeff());
    for (const auto& r : overlaps_diagonal(es)) {
      EXPECT_GE(r.overlap, 1.0 - 1e-10);
      EXPECT_DOUBLE_EQ(r.condition, std::sqrt(r.overlap));
    }
  }
}

TEST(EigFull, AnnulusMeanMatchesBulkLaw) {
  // Mean O_ii / N over 0.45 <= |lambda| <= 0.55 against the area average of the
  // finite-N conditional mean (1 - r^2 in the bulk). O_ii / N has an
  // inverse-gamma tail with infinite variance, so a few thousand eigenvalues
  // only pin the mean to ~7%; N = 64 keeps ~20k eigenvalues affordable.
  const SeedPolicy seeds{9};
  const int n = 64;
  double sum = 0.0;
  long count = 0;
  for (std::uint64_t i = 0; i < 8000; ++i) {
    RandomStream s = seeds.stream(i);
    for (const auto& r : overlaps_diagonal(eig_full(sample_ginibre(n, s)))) {
      const double m = std::abs(r.eigenvalue);
      if (m >= 0.45 && m <= 0.55) {
        sum += r.overlap / n;
        ++count;
      }
    }
  }
  ASSERT_GT(count, 40000);
  double num = 0.0;
  double den = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double r = 0.45 + 0.1 * (k + 0.5) / 1000.0;
    const double w = ginibre_density_finite_N(r, n) * r;
    num += ginibre_condnum_finite_N(r, n) * w;
    den += w;
  }
  const double expected = num / den;
  EXPECT_NEAR(expected, 0.7475, 0.01);
  EXPECT_NEAR(sum / count, expected, 0.05 * expected);
}

TEST(EigFull, DefectiveMatrixIsExposedByDiagnostics) {
  // A Jordan block has one eigenvector. The solver returns two nearly parallel
  // ones; inverting R keeps Lt R = I, so the damage shows up as cond(R) and O_ii
  // instead of the biorthogonality defect. Either outcome is acceptable.
  ComplexMatrix j(2, 2);
  j << 1.0, 1.0, 0.0, 1.0;
  try {
    const auto es = eig_full(j);
    EXPECT_GT(es.similarity_condition, 1e12);
    for (const auto& r : overlaps_diagonal(es)) EXPECT_GT(r.overlap, 1e12);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IllConditionedSimilarity);
  }
}

TEST(EigFull, NonSquareIsInvalid) {
  EXPECT_EQ(code_of([] { eig_full(ComplexMatrix::Zero(2, 3)); }), ErrorCode::InvalidArgument);
}

TEST(Resolvent, ZeroMatrixClosedForm) {
  for (const auto& [z, w] : {std::pair{cdouble(0.3, 0.1), cdouble(0.2, 0.0)}, std::pair{cdouble(-1.0, 2.0), cdouble(0.1, -0.4)}}) {
    const auto g = quaternion_resolvent(ComplexMatrix::Zero(5, 5), z, w);
    const double d = std::norm(z) + std::norm(w);
    EXPECT_NEAR(std::abs(g.g11 - std::conj(z) / d), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(g.g12 - std::conj(w) / d), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(g.g21 + w / d), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(g.g22 - z / d), 0.0, 1e-14);
  }
}

TEST(Resolvent, MatchesExplicitBlockInverse) {
  // Oracle: invert the 2N x 2N matrix [[z - X, -conj(w)], [w, conj(z) - X^+]]
  // and take normalized block traces.
  RandomStream s(12);
  const int n = 6;
  const ComplexMatrix x = sample_ginibre(n, s);
  const ComplexMatrix eye = ComplexMatrix::Identity(n, n);
  for (const auto& [z, w] : {std::pair{cdouble(0.3, 0.1), cdouble(0.2, 0.0)}, std::pair{cdouble(0.7, -0.5), cdouble(0.05, 0.3)}}) {
    ComplexMatrix big(2 * n, 2 * n);
    big << z * eye - x, -std::conj(w) * eye, w * eye, std::conj(z) * eye - x.adjoint();
    const ComplexMatrix inv = big.inverse();
    const cdouble g11 = inv.topLeftCorner(n, n).trace() / double(n);
    const cdouble g12 = inv.topRightCorner(n, n).trace() / double(n);
    const cdouble g21 = inv.bottomLeftCorner(n, n).trace() / double(n);
    const cdouble g22 = inv.bottomRightCorner(n, n).trace() / double(n);
    const auto g = quaternion_resolvent(x, z, w);
    EXPECT_LE(std::abs(g.g11 - g11), 1e-12);
    EXPECT_LE(std::abs(g.g12 - g12), 1e-12);
    EXPECT_LE(std::abs(g.g21 - g21), 1e-12);
    EXPECT_LE(std::abs(g.g22 - g22), 1e-12);
  }
}

TEST(Resolvent, BlockProductIdentityAndStructure) {
  RandomStream s(13);
  const ComplexMatrix x = sample_ginibre(40, s);
  for (const cdouble z : {cdouble(0.0, 0.0), cdouble(0.5, 0.5), cdouble(2.0, -1.0)}) {
    for (const cdouble w : {cdouble(1e-3, 0.0), cdouble(0.3, 0.2), cdouble(0.0, -2.0)}) {
      const auto g = quaternion_resolvent(x, z, w);
      const double n = 40.0;
      const cdouble lhs = -g.g12 * g.g21;
      const double rhs = std::norm(w) * g.trace_left * g.trace_right / (n * n);
      EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(1.0, rhs));
      EXPECT_LE(std::abs(g.g22 - std::conj(g.g11)), 1e-10);
      EXPECT_LE(std::abs(g.g21 + std::conj(g.g12)), 1e-10 * std::max(1.0, std::abs(g.g12)));
    }
  }
}

TEST(Resolvent, ZeroRegularizerAwayFromSpectrum) {
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d.diagonal() << 1.0, 2.0, 3.0;
  const cdouble z(0.0, 1.0);
  const auto g = quaternion_resolvent(d, z, 0.0);
  // w = 0 gives the ordinary trace of the resolvent.
  const cdouble expected = (1.0 / (z - 1.0) + 1.0 / (z - 2.0) + 1.0 / (z - 3.0)) / 3.0;
  EXPECT_LE(std::abs(g.g11 - expected), 1e-14);
  EXPECT_EQ(g.g12, cdouble(0.0));
}

TEST(Resolvent, SingularKernel) {
  EXPECT_EQ(code_of([] { quaternion_resolvent(ComplexMatrix::Zero(3, 3), 0.0, 0.0); }),
            ErrorCode::SingularRegularizedKernel);
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d.diagonal() << 1.0, 2.0;
  EXPECT_EQ(code_of([&] { quaternion_resolvent(d, 2.0, 0.0); }), ErrorCode::SingularRegularizedKernel);
}

TEST(SymmetryCheck, ScalarCase) {
  EXPECT_LE(resolvent_symmetry_check(ComplexMatrix::Zero(4, 4), cdouble(0.3, 0.1), cdouble(0.2, 0.0), 1e-4), 1e-6);
}

TEST(SymmetryCheck, GinibreSampleAndSecondOrder) {
  RandomStream s(14);
  const ComplexMatrix x = sample_ginibre(64, s);
  const cdouble z(0.3, 0.1);
  const cdouble w(0.2, 0.0);
  EXPECT_LE(resolvent_symmetry_check(x, z, w, 1e-4), 1e-5);
  const double coarse = resolvent_symmetry_check(x, z, w, 2e-2);
  const double fine = resolvent_symmetry_check(x, z, w, 1e-2);
  EXPECT_NEAR(coarse / fine, 4.0, 0.5);
}

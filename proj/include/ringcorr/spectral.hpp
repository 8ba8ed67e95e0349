#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "ringcorr/ensemble.hpp"

namespace ringcorr {

using cdouble = std::complex<double>;

/// Biorthonormal eigendecomposition X = R diag(lambda) Lt with Lt R = I.
struct EigenSystem {
  Eigen::VectorXcd eigenvalues;
  /// Columns are the right eigenvectors |R_i>.
  ComplexMatrix right;
  /// Rows are the left eigenvectors <L_i|.
  ComplexMatrix left;

  /// max |X R - R diag(lambda)|
  double residual = 0.0;
  /// max |Lt R - I|
  double biorthogonality_defect = 0.0;
  /// max_i |<L_i|R_i> - 1|
  double diagonal_defect = 0.0;
  /// 1-norm condition estimate of R.
  double similarity_condition = 0.0;

  Eigen::Index size() const { return eigenvalues.size(); }
};

struct OverlapRecord {
  cdouble eigenvalue;
  /// O_ii = <L_i|L_i><R_i|R_i>, >= 1.
  double overlap = 1.0;
  /// Eigenvalue condition number sqrt(O_ii).
  double condition = 1.0;
};

/// Samples whose biorthogonality defect exceeds this are rejected.
inline constexpr double kBiorthogonalityTolerance = 1e-6;

/// Dense nonsymmetric eigensolve (LAPACK zgeev, right vectors only); the left
/// eigenvectors are the rows of R^{-1}. Throws Error(IllConditionedSimilarity)
/// when the defect exceeds kBiorthogonalityTolerance.
EigenSystem eig_full(const ComplexMatrix& x);

std::vector<OverlapRecord> overlaps_diagonal(const EigenSystem& es);

/// 2x2 quaternionic resolvent at (z, w), without ensemble averaging.
struct QuaternionResolvent {
  cdouble g11, g12, g21, g22;
  /// Tr[((z-X)(z-X)^+ + |w|^2)^{-1}] and Tr[((z-X)^+(z-X) + |w|^2)^{-1}].
  double trace_left = 0.0;
  double trace_right = 0.0;
};

/// (1/N) bTr (Q x 1 - diag(X, X^+))^{-1} evaluated through the hermitized
/// N x N kernels; the 2N x 2N block matrix is never formed. Throws
/// Error(SingularRegularizedKernel) when the kernel is numerically singular
/// (only possible for w = 0 with z on the spectrum).
QuaternionResolvent quaternion_resolvent(const ComplexMatrix& x, cdouble z, cdouble w);

/// |d_w G11 - d_z G12| with Wirtinger derivatives from central differences of
/// step h in the real and imaginary directions.
double resolvent_symmetry_check(const ComplexMatrix& x, cdouble z, cdouble w, double h);

}  // namespace ringcorr

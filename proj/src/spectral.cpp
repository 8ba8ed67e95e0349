#include "ringcorr/spectral.hpp"

#include <cblas.h>
#include <lapacke.h>

#include <algorithm>
#include <limits>
#include <sstream>

#include "ringcorr/errors.hpp"

namespace ringcorr {

namespace {

lapack_complex_double* as_lapack(cdouble* p) { return reinterpret_cast<lapack_complex_double*>(p); }

}  // namespace

EigenSystem eig_full(const ComplexMatrix& x) {
  if (x.rows() != x.cols()) {
    throw Error(ErrorCode::InvalidArgument, "eig_full needs a square matrix");
  }
  const auto n = static_cast<lapack_int>(x.rows());
  EigenSystem es;
  es.eigenvalues.resize(n);
  es.right.resize(n, n);
  if (n == 0) return es;

  ComplexMatrix work = x;
  cdouble unused_left{};
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, as_lapack(work.data()), n, as_lapack(es.eigenvalues.data()),
                    as_lapack(&unused_left), 1, as_lapack(es.right.data()), n);
  if (info != 0) {
    std::ostringstream os;
    os << "zgeev failed with info=" << info;
    throw Error(ErrorCode::IllConditionedSimilarity, os.str());
  }

  Eigen::PartialPivLU<ComplexMatrix> lu(es.right);
  const double rcond = lu.rcond();
  es.similarity_condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  es.left = lu.solve(ComplexMatrix::Identity(n, n));

  es.residual = (x * es.right - es.right * es.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff();
  const ComplexMatrix gram = es.left * es.right;
  es.biorthogonality_defect = (gram - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  es.diagonal_defect = (gram.diagonal().array() - cdouble(1.0)).abs().maxCoeff();

  if (!(es.biorthogonality_defect <= kBiorthogonalityTolerance)) {
    std::ostringstream os;
    os << "biorthogonality defect " << es.biorthogonality_defect << " (cond(R) ~ " << es.similarity_condition << ")";
    throw Error(ErrorCode::IllConditionedSimilarity, os.str());
  }
  return es;
}

std::vector<OverlapRecord> overlaps_diagonal(const EigenSystem& es) {
  std::vector<OverlapRecord> out;
  out.reserve(static_cast<std::size_t>(es.size()));
  for (Eigen::Index i = 0; i < es.size(); ++i) {
    const double o = es.left.row(i).squaredNorm() * es.right.col(i).squaredNorm();
    out.push_back({es.eigenvalues(i), o, std::sqrt(o)});
  }
  return out;
}

namespace {

struct KernelSide {
  double trace_inverse = 0.0;  // Tr K^{-1}
  cdouble trace_b_adj = 0.0;   // Tr[B^+ K^{-1}]
};

// K = B B^+ + w2 I = L L^+. Tr K^{-1} = ||L^{-1}||_F^2 and
// Tr[B^+ K^{-1}] = <L^{-1} B, L^{-1}>.
KernelSide kernel_side(const ComplexMatrix& b, double w2) {
  const lapack_int n = static_cast<lapack_int>(b.rows());
  const cdouble one = 1.0;
  ComplexMatrix k = ComplexMatrix::Zero(n, n);
  cblas_zherk(CblasColMajor, CblasLower, CblasNoTrans, n, n, 1.0, b.data(), n, 0.0, k.data(), n);
  k.diagonal().array() += w2;
  const double anorm = LAPACKE_zlanhe(LAPACK_COL_MAJOR, '1', 'L', n, as_lapack(k.data()), n);
  if (LAPACKE_zpotrf(LAPACK_COL_MAJOR, 'L', n, as_lapack(k.data()), n) != 0) {
    throw Error(ErrorCode::SingularRegularizedKernel, "hermitized kernel is not positive definite");
  }
  double rcond = 0.0;
  if (LAPACKE_zpocon(LAPACK_COL_MAJOR, 'L', n, as_lapack(k.data()), n, anorm, &rcond) != 0 || !(rcond >= 1e-14)) {
    throw Error(ErrorCode::SingularRegularizedKernel, "hermitized kernel is numerically singular");
  }
  if (LAPACKE_ztrtri(LAPACK_COL_MAJOR, 'L', 'N', n, as_lapack(k.data()), n) != 0) {
    throw Error(ErrorCode::SingularRegularizedKernel, "Cholesky factor is singular");
  }
  k.triangularView<Eigen::StrictlyUpper>().setZero();
  ComplexMatrix p = b;
  cblas_ztrmm(CblasColMajor, CblasLeft, CblasLower, CblasNoTrans, CblasNonUnit, n, n, &one, k.data(), n, p.data(), n);
  return {k.squaredNorm(), p.conjugate().cwiseProduct(k).sum()};
}

}  // namespace

QuaternionResolvent quaternion_resolvent(const ComplexMatrix& x, cdouble z, cdouble w) {
  if (x.rows() != x.cols()) {
    throw Error(ErrorCode::InvalidArgument, "quaternion_resolvent needs a square matrix");
  }
  const Eigen::Index n = x.rows();
  const double w2 = std::norm(w);
  const ComplexMatrix a = z * ComplexMatrix::Identity(n, n) - x;

  // Left block: (A A^+ + |w|^2)^{-1}; right block: (A^+ A + |w|^2)^{-1}.
  const KernelSide left = kernel_side(a, w2);
  const KernelSide right = kernel_side(a.adjoint(), w2);

  const double inv_n = 1.0 / static_cast<double>(n);
  QuaternionResolvent g;
  g.g11 = left.trace_b_adj * inv_n;
  g.g22 = right.trace_b_adj * inv_n;
  g.g12 = std::conj(w) * left.trace_inverse * inv_n;
  g.g21 = -w * right.trace_inverse * inv_n;
  g.trace_left = left.trace_inverse;
  g.trace_right = right.trace_inverse;
  return g;
}

double resolvent_symmetry_check(const ComplexMatrix& x, cdouble z, cdouble w, double h) {
  const cdouble i(0.0, 1.0);
  auto g11 = [&](cdouble zz, cdouble ww) { return quaternion_resolvent(x, zz, ww).g11; };
  auto g12 = [&](cdouble zz, cdouble ww) { return quaternion_resolvent(x, zz, ww).g12; };

  const cdouble dg11_dre_w = (g11(z, w + h) - g11(z, w - h)) / (2.0 * h);
  const cdouble dg11_dim_w = (g11(z, w + i * h) - g11(z, w - i * h)) / (2.0 * h);
  const cdouble dg12_dre_z = (g12(z + h, w) - g12(z - h, w)) / (2.0 * h);
  const cdouble dg12_dim_z = (g12(z + i * h, w) - g12(z - i * h, w)) / (2.0 * h);

  const cdouble d_w_g11 = 0.5 * (dg11_dre_w - i * dg11_dim_w);
  const cdouble d_z_g12 = 0.5 * (dg12_dre_z - i * dg12_dim_z);
  return std::abs(d_w_g11 - d_z_g12);
}

}  // namespace ringcorr

#include "ringcorr/ensemble.hpp"

#include <cmath>
#include <sstream>

#include "ringcorr/errors.hpp"

namespace ringcorr {

std::string to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::Ginibre: return "ginibre";
    case FactorKind::InverseGinibre: return "inverse_ginibre";
    case FactorKind::HaarUnitary: return "haar_unitary";
    case FactorKind::TruncatedHaar: return "truncated_haar";
  }
  return "unknown";
}

std::string to_string(Combine combine) {
  return combine == Combine::Product ? "product" : "sum";
}

void EnsembleSpec::validate() const {
  if (dimension < 1) {
    throw Error(ErrorCode::ConfigInvalid, "ensemble dimension must be >= 1");
  }
  if (factors.empty()) {
    throw Error(ErrorCode::ConfigInvalid, "ensemble needs at least one factor");
  }
  for (const auto& f : factors) {
    if (combine == Combine::Sum && f.kind != FactorKind::HaarUnitary) {
      throw Error(ErrorCode::ConfigInvalid, "sum ensembles accept only haar_unitary factors");
    }
    if (f.kind == FactorKind::TruncatedHaar) {
      if (!(f.kappa > 0.0) || !std::isfinite(f.kappa)) {
        throw Error(ErrorCode::ConfigInvalid, "truncated_haar needs kappa > 0");
      }
      if (truncation_size(dimension, f.kappa) < 1) {
        std::ostringstream os;
        os << "truncated_haar: round(kappa*N) = 0 for kappa=" << f.kappa << ", N=" << dimension;
        throw Error(ErrorCode::ConfigInvalid, os.str());
      }
    }
  }
}

ComplexMatrix sample_ginibre(int n, RandomStream& stream) {
  ComplexMatrix x(n, n);
  const double variance = 1.0 / n;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, j) = stream.complex_normal(variance);
    }
  }
  return x;
}

ComplexMatrix sample_haar_unitary(int n, RandomStream& stream) {
  ComplexMatrix z(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      z(i, j) = stream.complex_normal(1.0);
    }
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const auto& r = qr.matrixQR();
  // Q -> Q diag(r_jj/|r_jj|) makes the factorization unique; without it the
  // output is not Haar distributed.
  for (Eigen::Index j = 0; j < n; ++j) {
    const std::complex<double> d = r(j, j);
    const double a = std::abs(d);
    if (a > 0.0) q.col(j) *= d / a;
  }
  return q;
}

int truncation_size(int n, double kappa) {
  return static_cast<int>(std::lround(kappa * n));
}

ComplexMatrix sample_truncated_haar(int n, double kappa, RandomStream& stream) {
  const int l = truncation_size(n, kappa);
  if (n < 1 || l < 1) {
    throw Error(ErrorCode::InvalidArgument, "truncated Haar needs N >= 1 and round(kappa N) >= 1");
  }
  return sample_haar_unitary(n + l, stream).topLeftCorner(n, n);
}

namespace {

ComplexMatrix draw_factor(const FactorSpec& f, int n, RandomStream& stream) {
  switch (f.kind) {
    case FactorKind::Ginibre:
    case FactorKind::InverseGinibre: return sample_ginibre(n, stream);
    case FactorKind::HaarUnitary: return sample_haar_unitary(n, stream);
    case FactorKind::TruncatedHaar: return sample_truncated_haar(n, f.kappa, stream);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown factor kind");
}

Eigen::PartialPivLU<ComplexMatrix> checked_lu(const ComplexMatrix& b, std::size_t factor_index) {
  Eigen::PartialPivLU<ComplexMatrix> lu(b);
  const double rcond = lu.rcond();
  if (!(rcond >= kSingularFactorRcond)) {
    std::ostringstream os;
    os << "inverse factor " << factor_index << " has rcond " << rcond;
    throw Error(ErrorCode::SingularFactor, os.str());
  }
  return lu;
}

}  // namespace

ComplexMatrix realize(const EnsembleSpec& spec, const RandomStream& stream) {
  spec.validate();
  const int n = spec.dimension;

  if (spec.combine == Combine::Sum) {
    ComplexMatrix y = ComplexMatrix::Zero(n, n);
    for (std::size_t f = 0; f < spec.factors.size(); ++f) {
      RandomStream s = stream.derive(f);
      y += sample_haar_unitary(n, s);
    }
    return y;
  }

  ComplexMatrix y;
  for (std::size_t f = 0; f < spec.factors.size(); ++f) {
    RandomStream s = stream.derive(f);
    const FactorSpec& factor = spec.factors[f];
    ComplexMatrix b = draw_factor(factor, n, s);
    if (factor.kind == FactorKind::InverseGinibre) {
      if (f == 0) {
        y = checked_lu(b, f).solve(ComplexMatrix::Identity(n, n));
      } else {
        // y B^{-1} = (B^{-T} y^T)^T
        const ComplexMatrix bt = b.transpose();
        y = checked_lu(bt, f).solve(y.transpose()).transpose();
      }
    } else if (f == 0) {
      y = std::move(b);
    } else {
      y = y * b;
    }
  }
  return y;
}

}  // namespace ringcorr

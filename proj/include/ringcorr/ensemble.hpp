#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "ringcorr/random.hpp"

namespace ringcorr {

using ComplexMatrix = Eigen::MatrixXcd;

enum class FactorKind { Ginibre, InverseGinibre, HaarUnitary, TruncatedHaar };
enum class Combine { Product, Sum };

struct FactorSpec {
  FactorKind kind = FactorKind::Ginibre;
  /// L/N for TruncatedHaar; ignored for other kinds.
  double kappa = 0.0;
};

/// Declarative composite ensemble. Product factors multiply left to right.
struct EnsembleSpec {
  Combine combine = Combine::Product;
  std::vector<FactorSpec> factors;
  int dimension = 0;

  /// Throws Error(ConfigInvalid) when the spec is malformed.
  void validate() const;
};

std::string to_string(FactorKind kind);
std::string to_string(Combine combine);

/// Ginibre matrix with i.i.d. complex Gaussian entries of variance 1/N, so the
/// limiting spectrum is the unit disc.
ComplexMatrix sample_ginibre(int n, RandomStream& stream);

/// Haar unitary from the QR factorization of a Gaussian matrix, with the
/// columns of Q rotated so that diag(R) is positive real.
ComplexMatrix sample_haar_unitary(int n, RandomStream& stream);

/// Top-left n x n block of an (n+L) x (n+L) Haar unitary, L = round(kappa n).
ComplexMatrix sample_truncated_haar(int n, double kappa, RandomStream& stream);

int truncation_size(int n, double kappa);

/// Reciprocal condition estimate below which an inverse factor is rejected.
inline constexpr double kSingularFactorRcond = 1e-14;

/// Draws one matrix from the composite ensemble. Factor f uses
/// stream.derive(f). Throws Error(SingularFactor) when an inverse factor is
/// numerically singular; callers resample.
ComplexMatrix realize(const EnsembleSpec& spec, const RandomStream& stream);

}  // namespace ringcorr

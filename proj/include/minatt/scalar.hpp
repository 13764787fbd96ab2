#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace minatt {

using Scalar = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;

/// Tolerance for identities that hold exactly in real arithmetic.
inline constexpr double kExactTol = 1e-12;
/// Tolerance for comparisons against SVD / eigen decompositions.
inline constexpr double kDecompTol = 1e-8;
/// Default length of the scanned prefix of a lazy diagonal.
inline constexpr std::size_t kDefaultPrefix = 10'000;

/// Throws DomainError unless both parts are finite.
Scalar checked(Scalar z);

/// Evaluation knobs shared by the spectral, gap and perturbation modules.
struct EvalOptions {
  std::size_t prefix = kDefaultPrefix;
};

}  // namespace minatt

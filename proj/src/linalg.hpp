#pragma once

#include <functional>

#include "minatt/scalar.hpp"

namespace minatt::detail {

double spectral_norm(const Matrix& m);
bool is_hermitian(const Matrix& m, double tol);
/// f applied to the eigenvalues of a Hermitian matrix.
Matrix hermitian_function(const Matrix& h, const std::function<double(double)>& f);
/// Rotate so the first entry of largest modulus is real and positive.
DenseVector normalize_phase(DenseVector v);

}  // namespace minatt::detail

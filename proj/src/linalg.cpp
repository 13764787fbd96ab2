#include "linalg.hpp"

#include <algorithm>
#include <cmath>

namespace minatt::detail {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (std::min(m.rows(), m.cols()) > 32) {
    Eigen::BDCSVD<Matrix> svd(m);
    return svd.singularValues()(0);
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

Matrix hermitian_function(const Matrix& h, const std::function<double(double)>& f) {
  if (h.size() == 0) return h;
  const Matrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  Eigen::VectorXd mapped = es.eigenvalues().unaryExpr(f);
  return es.eigenvectors() * mapped.cast<Scalar>().asDiagonal() * es.eigenvectors().adjoint();
}

DenseVector normalize_phase(DenseVector v) {
  if (v.size() == 0) return v;
  const double top = v.cwiseAbs().maxCoeff();
  if (top == 0.0) return v;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) >= top * (1.0 - 1e-12)) {
      v *= std::conj(v(k)) / std::abs(v(k));
      v(k) = std::abs(v(k));
      break;
    }
  }
  return v;
}

}  // namespace minatt::detail

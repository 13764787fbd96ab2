#include "minatt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "linalg.hpp"
#include "minatt/errors.hpp"

namespace minatt {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kPositivityTol = 1e-10;
constexpr double kMultiplicityGap = 1e-6;
constexpr double kIsolationGap = 1e-6;
constexpr double kNullTol = 1e-12;

struct SmallestSingular {
  double value = std::numeric_limits<double>::infinity();
  DenseVector vector;
};

SmallestSingular smallest_singular(const Matrix& m) {
  if (m.size() == 0) return {};
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto cols = m.cols();
  const auto k = svd.singularValues().size();
  if (cols > k) return {0.0, detail::normalize_phase(svd.matrixV().col(k))};
  return {svd.singularValues()(k - 1), detail::normalize_phase(svd.matrixV().col(cols - 1))};
}

std::size_t scan_end(const BlockForm& bf, const EvalOptions& opts) {
  return std::max(opts.prefix, bf.head_dim());
}

Vec witness_vector(const DenseVector& v, std::optional<std::size_t> dim) { return Vec::from_dense(v, dim); }

std::optional<std::size_t> single_index(const Vec& v) {
  if (v.entries().size() == 1) return v.entries()[0].index;
  return std::nullopt;
}

std::vector<Eigenvalue> cluster(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<Eigenvalue> out;
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i + 1;
    double sum = values[i];
    while (j < values.size() && values[j] - values[j - 1] <= kMultiplicityGap) sum += values[j++];
    out.push_back({sum / double(j - i), j - i});
    i = j;
  }
  return out;
}

// Real eigenvalues of a self-adjoint operator at truncation n: the head
// block's eigenvalues followed by the tail entries up to n.
std::vector<double> truncation_eigenvalues(const BlockForm& bf, std::size_t n) {
  std::vector<double> out;
  if (bf.head.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (bf.head + bf.head.adjoint()), Eigen::EigenvaluesOnly);
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) out.push_back(es.eigenvalues()(k));
  }
  if (bf.tail) {
    for (std::size_t k = bf.head_dim() + 1; k <= n; ++k) out.push_back((*bf.tail)(k).real());
  }
  return out;
}

bool real_points(const AccumulationSet& acc) {
  return std::all_of(acc.points.begin(), acc.points.end(),
                     [](Scalar p) { return std::abs(p.imag()) <= kHermitianTol * std::max(1.0, std::abs(p)); });
}

}  // namespace

AttainmentCertificate minimum_modulus(const OperatorRep& op, const EvalOptions& opts) {
  AttainmentCertificate cert;
  if (op.is_finite()) {
    const auto s = smallest_singular(dense(op));
    cert.value = s.value;
    cert.attained = true;
    cert.witness = witness_vector(s.vector, op.cols());
  } else {
    const BlockForm bf = block_form(op);
    const auto head = smallest_singular(bf.head);
    double scan_min = std::numeric_limits<double>::infinity();
    std::size_t scan_idx = 0;
    for (std::size_t n = bf.head_dim() + 1; n <= scan_end(bf, opts); ++n) {
      const double v = std::abs((*bf.tail)(n));
      if (v < scan_min) {
        scan_min = v;
        scan_idx = n;
      }
    }
    const double prefix_min = std::min(head.value, scan_min);
    double tail_inf = 0.0;
    try {
      tail_inf = abs_infimum(bf.tail->accumulation());
    } catch (const InconclusiveError& e) {
      throw InconclusiveError(std::string("minimum modulus: ") + e.what(), 0.0, prefix_min);
    }
    cert.value = std::min(prefix_min, tail_inf);
    cert.attained = prefix_min <= tail_inf;
    if (cert.attained) {
      if (head.value <= scan_min) {
        cert.witness = witness_vector(head.vector, std::nullopt);
      } else {
        cert.witness = Vec::basis(scan_idx);
      }
    }
  }
  if (cert.witness) {
    cert.witness_index = single_index(*cert.witness);
    cert.residual = std::max(0.0, apply(op, *cert.witness).norm() - cert.value);
  }
  return cert;
}

PositivityCheck check_positive(const OperatorRep& op, const EvalOptions& opts) {
  const BlockForm bf = block_form(op);
  if (bf.head.rows() != bf.head.cols()) return {false, 0.0, "not square"};
  if (!detail::is_hermitian(bf.head, kHermitianTol)) {
    return {false, (bf.head - bf.head.adjoint()).cwiseAbs().maxCoeff(), "not Hermitian"};
  }
  double worst = std::numeric_limits<double>::infinity();
  if (bf.head.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (bf.head + bf.head.adjoint()), Eigen::EigenvaluesOnly);
    worst = es.eigenvalues()(0);
  }
  if (bf.tail) {
    for (std::size_t n = bf.head_dim() + 1; n <= scan_end(bf, opts); ++n) {
      const Scalar d = (*bf.tail)(n);
      if (std::abs(d.imag()) > kHermitianTol * std::max(1.0, std::abs(d))) {
        return {false, d.imag(), "entry " + std::to_string(n) + " is not real"};
      }
      worst = std::min(worst, d.real());
    }
    const auto acc = bf.tail->accumulation();
    if (!real_points(acc)) return {false, 0.0, "accumulation point off the real axis"};
    for (const auto& p : acc.points) worst = std::min(worst, p.real());
  }
  if (worst < -kPositivityTol) return {false, worst, "negative spectral value " + std::to_string(worst)};
  return {true, worst, "positive"};
}

bool is_self_adjoint(const OperatorRep& op, const EvalOptions& opts) {
  const BlockForm bf = block_form(op);
  if (!detail::is_hermitian(bf.head, kHermitianTol)) return false;
  if (!bf.tail) return true;
  for (std::size_t n = bf.head_dim() + 1; n <= scan_end(bf, opts); ++n) {
    const Scalar d = (*bf.tail)(n);
    if (std::abs(d.imag()) > kHermitianTol * std::max(1.0, std::abs(d))) return false;
  }
  return real_points(bf.tail->accumulation());
}

double numerical_range_infimum(const OperatorRep& op, const EvalOptions& opts) {
  if (!is_self_adjoint(op, opts)) throw DomainError("numerical range infimum needs a self-adjoint operator");
  const BlockForm bf = block_form(op);
  double best = std::numeric_limits<double>::infinity();
  for (double v : truncation_eigenvalues(bf, scan_end(bf, opts))) best = std::min(best, v);
  if (bf.tail) {
    for (const auto& p : bf.tail->accumulation().points) best = std::min(best, p.real());
  }
  return best;
}

AttainmentDecision is_minimum_attaining(const OperatorRep& op, const EvalOptions& opts) {
  AttainmentDecision out;
  out.certificate = minimum_modulus(op, opts);
  out.attained = out.certificate.attained;
  if (!check_positive(op, opts).positive) return out;
  const double m = out.certificate.value;
  if (out.attained) {
    const Vec& w = *out.certificate.witness;
    const Vec residual = apply(op, w) + w.scaled(-m).with_dim(apply(op, w).dim());
    out.eigenvalue_consistent = residual.norm() <= kDecompTol;
  } else {
    const BlockForm bf = block_form(op);
    bool hit = false;
    for (double v : truncation_eigenvalues(bf, scan_end(bf, opts))) hit = hit || std::abs(v - m) <= kDecompTol;
    out.eigenvalue_consistent = !hit;
  }
  return out;
}

OperatorRep square_root(const OperatorRep& op, const EvalOptions& opts) {
  const auto pos = check_positive(op, opts);
  if (!pos.positive) throw NotPositiveError("square root needs a positive operator: " + pos.detail, pos.worst);
  auto root = [](double x) { return std::sqrt(std::max(0.0, x)); };
  const BlockForm bf = block_form(op);
  if (!bf.tail) return OperatorRep::matrix(detail::hermitian_function(bf.head, root));
  return from_block(detail::hermitian_function(bf.head, root), bf.tail->abs().sqrt());
}

namespace {

struct SvdParts {
  Matrix modulus;
  Matrix isometry;
};

SvdParts svd_polar(const Matrix& m) {
  if (m.size() == 0) return {m, m};
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const auto k = s.size();
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(m.cols());
  sigma.head(k) = s;
  const Matrix& v = svd.matrixV();
  const Matrix& u = svd.matrixU();
  const double cutoff = double(std::max(m.rows(), m.cols())) * std::numeric_limits<double>::epsilon() *
                        (k > 0 ? s(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < k && s(rank) > cutoff) ++rank;
  SvdParts out;
  out.modulus = v * sigma.cast<Scalar>().asDiagonal() * v.adjoint();
  out.isometry = u.leftCols(rank) * v.leftCols(rank).adjoint();
  return out;
}

}  // namespace

OperatorRep modulus(const OperatorRep& op, const EvalOptions& opts) { return polar(op, opts).modulus; }

PolarParts polar(const OperatorRep& op, const EvalOptions&) {
  const BlockForm bf = block_form(op);
  const SvdParts head = svd_polar(bf.head);
  if (!bf.tail) return {OperatorRep::matrix(head.isometry), OperatorRep::matrix(head.modulus)};
  if (op.is_diagonal()) {
    const DiagSeq& d = *bf.tail;
    return {OperatorRep::diagonal(d.phase()), OperatorRep::diagonal(d.abs())};
  }
  return {from_block(head.isometry, bf.tail->phase()), from_block(head.modulus, bf.tail->abs())};
}

std::vector<double> detect_accumulation(std::vector<double> values, double radius, std::size_t min_count) {
  if (values.empty()) return {};
  if (min_count == 0) min_count = std::max<std::size_t>(10, values.size() / 100);
  std::sort(values.begin(), values.end());
  const double width = 2.0 * radius;
  const std::size_t n = values.size();

  // count[i] = number of values in [values[i], values[i] + width].
  std::vector<std::size_t> count(n);
  for (std::size_t i = 0, j = 0; i < n; ++i) {
    j = std::max(j, i);
    while (j + 1 < n && values[j + 1] <= values[i] + width) ++j;
    count[i] = j - i + 1;
  }

  // A window is a peak when no window starting within +-width of it is denser. Tails that
  // approach a limit thin out monotonically, so two limits closer than their tails still
  // give separate peaks.
  std::vector<double> out;
  std::deque<std::size_t> best;  // indices with decreasing counts over the sliding range
  std::size_t lo = 0, hi = 0;
  double last_start = -std::numeric_limits<double>::infinity();
  std::size_t last_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (hi < n && values[hi] <= values[i] + width) {
      while (!best.empty() && count[best.back()] <= count[hi]) best.pop_back();
      best.push_back(hi++);
    }
    while (values[lo] < values[i] - width) ++lo;
    while (best.front() < lo) best.pop_front();
    if (count[i] < min_count || count[i] < count[best.front()]) continue;
    const double centre = values[i + count[i] / 2];
    if (values[i] - last_start <= width) {
      if (count[i] > last_count) {
        out.back() = centre;
        last_count = count[i];
      }
      continue;
    }
    out.push_back(centre);
    last_start = values[i];
    last_count = count[i];
  }
  return out;
}

SpectrumReport essential_spectrum(const OperatorRep& op, const EvalOptions& opts) {
  if (!is_self_adjoint(op, opts)) throw DomainError("essential spectrum needs a self-adjoint operator");
  const BlockForm bf = block_form(op);
  SpectrumReport report;
  const std::size_t n = bf.tail ? scan_end(bf, opts) : bf.head_dim();
  report.truncation = n;
  if (bf.tail) {
    const auto acc = bf.tail->accumulation();
    for (const auto& p : acc.points) report.essential.points.push_back(p.real());
    std::sort(report.essential.points.begin(), report.essential.points.end());
    report.essential.unbounded = acc.infinity;
  }
  const auto values = truncation_eigenvalues(bf, n);
  std::vector<double> isolated;
  for (double v : values) {
    const bool near_essential = std::any_of(report.essential.points.begin(), report.essential.points.end(),
                                            [&](double p) { return std::abs(v - p) <= kIsolationGap; });
    if (!near_essential) isolated.push_back(v);
  }
  report.discrete = cluster(std::move(isolated));
  if (bf.tail) report.detected = detect_accumulation(values);
  return report;
}

bool same_points(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  auto covered = [tol](const std::vector<double>& xs, const std::vector<double>& ys) {
    return std::all_of(xs.begin(), xs.end(), [&](double x) {
      return std::any_of(ys.begin(), ys.end(), [&](double y) { return std::abs(x - y) <= tol; });
    });
  };
  return covered(a, b) && covered(b, a);
}

WeylReport weyl_check(const OperatorRep& a, const OperatorRep& c, const EvalOptions& opts) {
  const auto* sum = std::get_if<SumOp>(&c.variant());
  const bool zero_base =
      sum && std::visit([](const auto& b) {
        if constexpr (std::is_same_v<std::decay_t<decltype(b)>, MatrixOp>) {
          return b.data.isZero(0.0);
        } else {
          return b.seq.is_zero();
        }
      }, sum->base);
  if (!sum || !zero_base || sum->shift != Scalar(0.0)) {
    throw DomainError("Weyl perturbation must be a finite list of rank-one terms");
  }
  const std::size_t k = std::max<std::size_t>(c.term_support(), 1);
  if (!detail::is_hermitian(truncated_matrix(c, k), kHermitianTol)) {
    throw DomainError("Weyl perturbation must be Hermitian");
  }
  WeylReport out;
  out.original = essential_spectrum(a, opts);
  out.perturbed = essential_spectrum(add(a, c), opts);
  out.declared_agree = out.original.essential.unbounded == out.perturbed.essential.unbounded &&
                       same_points(out.original.essential.points, out.perturbed.essential.points, 1e-6);
  out.detection_matches = same_points(out.original.detected, out.original.essential.points, 1e-3) &&
                          same_points(out.perturbed.detected, out.perturbed.essential.points, 1e-3);
  return out;
}

}  // namespace minatt

#include "minatt/operator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "linalg.hpp"
#include "minatt/errors.hpp"
#include "overloaded.hpp"

namespace minatt {

namespace {

using detail::Overloaded;
using Base = std::variant<MatrixOp, DiagonalOp>;

struct Parts {
  Base base;
  Scalar shift{0.0};
  std::vector<RankOneTerm> terms;
};

Parts parts_of(const OperatorRep& op) {
  return std::visit(Overloaded{
                        [](const MatrixOp& m) { return Parts{m, 0.0, {}}; },
                        [](const DiagonalOp& d) { return Parts{d, 0.0, {}}; },
                        [](const SumOp& s) { return Parts{s.base, s.shift, s.terms}; },
                    },
                    op.variant());
}

OperatorRep from_parts(Parts p) {
  if (p.shift == Scalar(0.0) && p.terms.empty()) {
    return std::visit(Overloaded{
                          [](MatrixOp& m) { return OperatorRep::matrix(std::move(m.data)); },
                          [](DiagonalOp& d) { return OperatorRep::diagonal(std::move(d.seq)); },
                      },
                      p.base);
  }
  return OperatorRep::sum(std::move(p.base), p.shift, std::move(p.terms));
}

const Matrix* base_matrix(const Base& b) {
  const auto* m = std::get_if<MatrixOp>(&b);
  return m ? &m->data : nullptr;
}

void check_term_fits(const Base& base, const RankOneTerm& t) {
  if (const Matrix* m = base_matrix(base)) {
    if (t.left.support_end() > static_cast<std::size_t>(m->cols()) ||
        t.right.support_end() > static_cast<std::size_t>(m->rows())) {
      throw DomainError("rank-one term support exceeds the matrix shape");
    }
  }
}

Matrix outer(const RankOneTerm& t, std::size_t rows, std::size_t cols) {
  return t.coeff * t.right.to_dense(rows) * t.left.to_dense(cols).adjoint();
}

}  // namespace

RankOneTerm RankOneTerm::make(Scalar coeff, Vec left, Vec right) {
  if (std::abs(left.norm() - 1.0) > kExactTol || std::abs(right.norm() - 1.0) > kExactTol) {
    throw DomainError("rank-one term vectors must have unit norm");
  }
  return {checked(coeff), std::move(left), std::move(right)};
}

Vec RankOneTerm::apply(const Vec& x) const {
  const Scalar c = coeff * inner(x, left);
  if (c == Scalar(0.0)) return Vec({}, right.dim());
  return right.scaled(c);
}

std::size_t RankOneTerm::support_end() const {
  return std::max(left.support_end(), right.support_end());
}

bool MatrixOp::operator==(const MatrixOp& other) const {
  return data.rows() == other.data.rows() && data.cols() == other.data.cols() && data == other.data;
}

OperatorRep OperatorRep::matrix(Matrix data) {
  if (data.rows() < 1 || data.cols() < 1) throw DomainError("matrix dimensions must be >= 1");
  if (!data.allFinite()) throw DomainError("non-finite matrix entry");
  return OperatorRep(MatrixOp{std::move(data)});
}

OperatorRep OperatorRep::diagonal(DiagSeq seq) { return OperatorRep(DiagonalOp{std::move(seq)}); }

OperatorRep OperatorRep::sum(Base base, Scalar shift, std::vector<RankOneTerm> terms) {
  if (const Matrix* m = base_matrix(base)) {
    if (m->rows() < 1 || m->cols() < 1) throw DomainError("matrix dimensions must be >= 1");
    if (shift != Scalar(0.0) && m->rows() != m->cols()) {
      throw DomainError("a shift needs a square matrix base");
    }
  }
  for (const auto& t : terms) check_term_fits(base, t);
  return OperatorRep(SumOp{std::move(base), checked(shift), std::move(terms)});
}

bool OperatorRep::is_finite() const {
  if (is_matrix()) return true;
  if (const auto* s = std::get_if<SumOp>(&rep_)) return base_matrix(s->base) != nullptr;
  return false;
}

std::optional<std::size_t> OperatorRep::rows() const {
  const auto p = parts_of(*this);
  if (const Matrix* m = base_matrix(p.base)) return static_cast<std::size_t>(m->rows());
  return std::nullopt;
}

std::optional<std::size_t> OperatorRep::cols() const {
  const auto p = parts_of(*this);
  if (const Matrix* m = base_matrix(p.base)) return static_cast<std::size_t>(m->cols());
  return std::nullopt;
}

std::size_t OperatorRep::term_support() const {
  std::size_t k = 0;
  if (const auto* s = std::get_if<SumOp>(&rep_)) {
    for (const auto& t : s->terms) k = std::max(k, t.support_end());
  }
  return k;
}

Vec apply(const OperatorRep& op, const Vec& x) {
  const Parts p = parts_of(op);
  Vec out = std::visit(
      Overloaded{
          [&](const MatrixOp& m) {
            const auto cols = static_cast<std::size_t>(m.data.cols());
            if (x.support_end() > cols) throw DomainError("vector support exceeds matrix columns");
            return Vec::from_dense(m.data * x.to_dense(cols), static_cast<std::size_t>(m.data.rows()));
          },
          [&](const DiagonalOp& d) {
            std::vector<Vec::Entry> entries;
            for (const auto& e : x.entries()) {
              const Scalar v = d.seq(e.index) * e.value;
              if (v != Scalar(0.0)) entries.push_back({e.index, v});
            }
            return Vec(std::move(entries));
          },
      },
      p.base);
  if (p.shift != Scalar(0.0)) out = out + x.scaled(p.shift).with_dim(out.dim());
  for (const auto& t : p.terms) out = out + t.apply(x).with_dim(out.dim());
  return out;
}

OperatorRep adjoint(const OperatorRep& op) {
  Parts p = parts_of(op);
  std::visit(Overloaded{
                 [](MatrixOp& m) { m.data = m.data.adjoint().eval(); },
                 [](DiagonalOp& d) { d.seq = d.seq.conj(); },
             },
             p.base);
  p.shift = std::conj(p.shift);
  for (auto& t : p.terms) t = t.adjoint();
  if (op.is_sum()) return OperatorRep::sum(std::move(p.base), p.shift, std::move(p.terms));
  return from_parts(std::move(p));
}

OperatorRep scale_shift(const OperatorRep& op, Scalar alpha, Scalar beta) {
  if (alpha == Scalar(1.0) && beta == Scalar(0.0)) return op;
  alpha = checked(alpha);
  beta = checked(beta);
  if (op.is_matrix()) {
    const Matrix& m = std::get<MatrixOp>(op.variant()).data;
    if (beta != Scalar(0.0) && m.rows() != m.cols()) throw DomainError("a shift needs a square operator");
    Matrix out = alpha * m;
    if (beta != Scalar(0.0)) out += beta * Matrix::Identity(m.rows(), m.cols());
    return OperatorRep::matrix(std::move(out));
  }
  if (op.is_diagonal()) return OperatorRep::diagonal(std::get<DiagonalOp>(op.variant()).seq.affine(alpha, beta));
  Parts p = parts_of(op);
  std::visit(Overloaded{
                 [&](MatrixOp& m) { m.data *= alpha; },
                 [&](DiagonalOp& d) { d.seq = d.seq.affine(alpha, 0.0); },
             },
             p.base);
  p.shift = alpha * p.shift + beta;
  for (auto& t : p.terms) t.coeff *= alpha;
  return OperatorRep::sum(std::move(p.base), p.shift, std::move(p.terms));
}

OperatorRep add_rank_one(const OperatorRep& op, RankOneTerm term) {
  Parts p = parts_of(op);
  p.terms.push_back(std::move(term));
  return OperatorRep::sum(std::move(p.base), p.shift, std::move(p.terms));
}

Matrix truncated_matrix(const OperatorRep& op, std::size_t n) {
  if (n < 1) throw DomainError("truncation size must be >= 1");
  if (op.term_support() > n) {
    throw DomainError("rank-one support " + std::to_string(op.term_support()) + " exceeds truncation " +
                      std::to_string(n));
  }
  const Parts p = parts_of(op);
  Matrix out = std::visit(
      Overloaded{
          [&](const MatrixOp& m) -> Matrix {
            const auto r = std::min<Eigen::Index>(m.data.rows(), static_cast<Eigen::Index>(n));
            const auto c = std::min<Eigen::Index>(m.data.cols(), static_cast<Eigen::Index>(n));
            return m.data.topLeftCorner(r, c);
          },
          [&](const DiagonalOp& d) -> Matrix {
            DenseVector diag(static_cast<Eigen::Index>(n));
            for (std::size_t k = 1; k <= n; ++k) diag(static_cast<Eigen::Index>(k - 1)) = d.seq(k);
            return diag.asDiagonal();
          },
      },
      p.base);
  if (p.shift != Scalar(0.0)) out += p.shift * Matrix::Identity(out.rows(), out.cols());
  for (const auto& t : p.terms) {
    out += outer(t, static_cast<std::size_t>(out.rows()), static_cast<std::size_t>(out.cols()));
  }
  return out;
}

OperatorRep truncate(const OperatorRep& op, std::size_t n) { return OperatorRep::matrix(truncated_matrix(op, n)); }

Matrix dense(const OperatorRep& op) {
  if (!op.is_finite()) throw DomainError("dense form needs a finite operator");
  return truncated_matrix(op, std::max(*op.rows(), *op.cols()));
}

OperatorRep add(const OperatorRep& a, const OperatorRep& b) {
  if (a.is_finite() != b.is_finite()) throw DomainError("cannot add a matrix operator and an l^2 operator");
  Parts pa = parts_of(a);
  Parts pb = parts_of(b);
  Parts out;
  if (a.is_finite()) {
    const Matrix& ma = *base_matrix(pa.base);
    const Matrix& mb = *base_matrix(pb.base);
    if (ma.rows() != mb.rows() || ma.cols() != mb.cols()) throw DomainError("shape mismatch in operator sum");
    out.base = MatrixOp{ma + mb};
  } else {
    out.base = DiagonalOp{std::get<DiagonalOp>(pa.base).seq.plus(std::get<DiagonalOp>(pb.base).seq)};
  }
  out.shift = pa.shift + pb.shift;
  out.terms = std::move(pa.terms);
  out.terms.insert(out.terms.end(), pb.terms.begin(), pb.terms.end());
  if (a.is_sum() || b.is_sum()) return OperatorRep::sum(std::move(out.base), out.shift, std::move(out.terms));
  return from_parts(std::move(out));
}

OperatorRep zero_like(const OperatorRep& op) {
  if (op.is_finite()) {
    return OperatorRep::matrix(Matrix::Zero(static_cast<Eigen::Index>(*op.rows()),
                                            static_cast<Eigen::Index>(*op.cols())));
  }
  return OperatorRep::diagonal(DiagSeq::zero());
}

BlockForm block_form(const OperatorRep& op) {
  if (op.is_finite()) return {dense(op), std::nullopt};
  const Parts p = parts_of(op);
  const DiagSeq tail = std::get<DiagonalOp>(p.base).seq.affine(1.0, p.shift);
  const std::size_t k = op.term_support();
  if (k == 0) return {Matrix(0, 0), tail};
  return {truncated_matrix(op, k), tail};
}

OperatorRep from_block(const Matrix& head, const DiagSeq& tail) {
  const auto k = head.rows();
  if (k == 0) return OperatorRep::diagonal(tail);
  Matrix correction = head;
  for (Eigen::Index i = 0; i < k; ++i) correction(i, i) -= tail(static_cast<std::size_t>(i + 1));
  Eigen::JacobiSVD<Matrix> svd(correction, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double cutoff = 1e-14 * std::max(1.0, head.cwiseAbs().maxCoeff());
  std::vector<RankOneTerm> terms;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double s = svd.singularValues()(i);
    if (s <= cutoff) break;
    Vec left = Vec::from_dense(svd.matrixV().col(i));
    Vec right = Vec::from_dense(svd.matrixU().col(i));
    terms.push_back(RankOneTerm::make(s, left.scaled(1.0 / left.norm()), right.scaled(1.0 / right.norm())));
  }
  if (terms.empty()) return OperatorRep::diagonal(tail);
  return OperatorRep::sum(DiagonalOp{tail}, 0.0, std::move(terms));
}

std::optional<DiagSeq> as_diagonal(const OperatorRep& op) {
  if (op.is_finite()) return std::nullopt;
  const Parts p = parts_of(op);
  const DiagSeq& base = std::get<DiagonalOp>(p.base).seq;
  std::map<std::size_t, Scalar> extra;
  for (const auto& t : p.terms) {
    if (t.left.entries().size() != 1 || t.right.entries().size() != 1) return std::nullopt;
    const auto& l = t.left.entries()[0];
    const auto& r = t.right.entries()[0];
    if (l.index != r.index) return std::nullopt;
    extra[l.index] += t.coeff * r.value * std::conj(l.value);
  }
  DiagSeq out = base.affine(1.0, p.shift);
  for (const auto& [k, v] : extra) out = out.with_override(k, base(k) + p.shift + v);
  return out;
}

NormResult operator_norm(const OperatorRep& op, const EvalOptions& opts) {
  if (op.is_finite()) return {detail::spectral_norm(dense(op)), 0.0};
  const BlockForm bf = block_form(op);
  const double acc_sup = abs_supremum(bf.tail->accumulation());
  if (!std::isfinite(acc_sup)) throw UnboundedError("operator '" + bf.tail->describe() + "' is unbounded");
  double best = std::max(detail::spectral_norm(bf.head), acc_sup);
  const std::size_t end = std::max(opts.prefix, bf.head_dim() + 1);
  for (std::size_t n = bf.head_dim() + 1; n <= end; ++n) best = std::max(best, std::abs((*bf.tail)(n)));
  return {best, 0.0};
}

}  // namespace minatt

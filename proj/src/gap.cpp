#include "minatt/gap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "linalg.hpp"
#include "minatt/errors.hpp"

namespace minatt {

namespace {

constexpr double kOrthonormalTol = 1e-10;

Matrix inverse_spd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

Matrix check_of(const Matrix& t) { return inverse_spd(Matrix::Identity(t.cols(), t.cols()) + t.adjoint() * t); }
Matrix hat_of(const Matrix& t) { return inverse_spd(Matrix::Identity(t.rows(), t.rows()) + t * t.adjoint()); }

Matrix psd_sqrt(const Matrix& m) {
  return detail::hermitian_function(m, [](double x) { return std::sqrt(std::max(0.0, x)); });
}

double closed_form_dense(const Matrix& s, const Matrix& t) {
  if (s.size() == 0) return 0.0;
  const Matrix t_hat = psd_sqrt(hat_of(t));
  const Matrix s_hat = psd_sqrt(hat_of(s));
  const Matrix t_check = psd_sqrt(check_of(t));
  const Matrix s_check = psd_sqrt(check_of(s));
  const double first = detail::spectral_norm(t_hat * (t - s) * s_check);
  const double second = detail::spectral_norm(s_hat * (s - t) * t_check);
  return std::max(first, second);
}

double check_orthonormal(const Matrix& q) {
  if (q.cols() == 0) return 0.0;
  return (q.adjoint() * q - Matrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

// sup |d|/(1+|d|^2) over entries n > from plus the accumulation points.
double tail_cross_norm(const DiagSeq& d, std::size_t from, std::size_t to) {
  double best = 0.0;
  for (std::size_t n = from; n <= to; ++n) {
    const double a = std::abs(d(n));
    best = std::max(best, a / (1.0 + a * a));
  }
  for (const auto& p : d.accumulation().points) {
    const double a = std::abs(p);
    best = std::max(best, a / (1.0 + a * a));
  }
  return best;
}

struct EntrywiseGap {
  double value = 0.0;
  double tail_bound = 0.0;
};

double chordal_points(const std::optional<Scalar>& a, const std::optional<Scalar>& b) {
  if (!a && !b) return 0.0;
  if (!a) return chordal_to_infinity(*b);
  if (!b) return chordal_to_infinity(*a);
  return chordal(*a, *b);
}

std::vector<std::optional<Scalar>> sphere_points(const AccumulationSet& acc) {
  std::vector<std::optional<Scalar>> out(acc.points.begin(), acc.points.end());
  if (acc.infinity) out.emplace_back(std::nullopt);
  return out;
}

// Drops overrides that only touch indices <= to.
DiagSeq beyond(const DiagSeq& s, std::size_t to) {
  const DiagSeq::Node* node = &s.node();
  std::shared_ptr<const DiagSeq::Node> keep;
  while (node->kind == DiagSeq::Node::Kind::Map && node->map == SeqMap::Override && node->index <= to) {
    keep = node->lhs;
    node = keep.get();
  }
  return keep ? DiagSeq::from_node(keep) : s;
}

// Entrywise gap over n in [from, to], then a certified bound for n > to.
EntrywiseGap entrywise_gap(const DiagSeq& s, const DiagSeq& t, std::size_t from, std::size_t to) {
  EntrywiseGap out;
  for (std::size_t n = from; n <= to; ++n) out.value = std::max(out.value, chordal(s(n), t(n)));
  // identical past the prefix: nothing left to bound
  if (beyond(s, to) == beyond(t, to)) return out;
  try {
    double pair_sup = 0.0;
    const auto ps = sphere_points(s.accumulation());
    const auto pt = sphere_points(t.accumulation());
    for (const auto& a : ps) {
      for (const auto& b : pt) pair_sup = std::max(pair_sup, chordal_points(a, b));
    }
    double upper = std::min(1.0, pair_sup + tail_radius(s, to) + tail_radius(t, to));

    // |s_n - t_n| bounds the chordal gap as well; use it when the difference has a tail.
    const DiagSeq diff = s.plus(t.affine(-1.0, 0.0));
    if (diff.has_tail()) {
      const auto acc = diff.accumulation();
      if (!acc.infinity) {
        double radius = 0.0;
        for (std::size_t n = to / 2 + 1; n <= to; ++n) {
          double nearest = std::numeric_limits<double>::infinity();
          for (const auto& p : acc.points) nearest = std::min(nearest, std::abs(diff(n) - p));
          radius = std::max(radius, nearest);
        }
        upper = std::min(upper, abs_supremum(acc) + radius);
      }
    }
    out.tail_bound = std::max(0.0, upper - out.value);
  } catch (const InconclusiveError& e) {
    throw InconclusiveError(std::string("gap tail: ") + e.what(), out.value, 1.0);
  }
  return out;
}

std::size_t scan_end(std::size_t head_dim, const EvalOptions& opts) { return std::max(opts.prefix, head_dim + 1); }

}  // namespace

std::string_view to_string(GapRoute route) {
  switch (route) {
    case GapRoute::Graph:
      return "graph";
    case GapRoute::ClosedForm:
      return "closed_form";
    case GapRoute::Diagonal:
      return "diagonal";
  }
  return "unknown";
}

DefectPair defect_resolvent(const OperatorRep& t, const EvalOptions& opts) {
  const BlockForm bf = block_form(t);
  const Matrix& head = bf.head;
  Matrix head_check = head.size() ? check_of(head) : Matrix(0, 0);
  Matrix head_hat = head.size() ? hat_of(head) : Matrix(0, 0);
  double cross = head.size() ? detail::spectral_norm(head * head_check) : 0.0;
  double adjoint_cross = head.size() ? detail::spectral_norm(head.adjoint() * head_hat) : 0.0;
  if (!bf.tail) {
    return {OperatorRep::matrix(head_check), OperatorRep::matrix(head_hat), cross, adjoint_cross};
  }
  const DiagSeq tail_defect = bf.tail->defect();
  const double tail_cross = tail_cross_norm(*bf.tail, bf.head_dim() + 1, scan_end(bf.head_dim(), opts));
  cross = std::max(cross, tail_cross);
  adjoint_cross = std::max(adjoint_cross, tail_cross);
  return {from_block(head_check, tail_defect), from_block(head_hat, tail_defect), cross, adjoint_cross};
}

GapResult subspace_gap(const Matrix& m_basis, const Matrix& n_basis) {
  if (m_basis.rows() != n_basis.rows()) throw DomainError("subspaces live in different ambient spaces");
  if (check_orthonormal(m_basis) > kOrthonormalTol || check_orthonormal(n_basis) > kOrthonormalTol) {
    throw DomainError("subspace basis is not orthonormal");
  }
  const auto d = m_basis.rows();
  const Matrix pm = m_basis * m_basis.adjoint();
  const Matrix pn = n_basis * n_basis.adjoint();
  GapResult out;
  out.route = GapRoute::Graph;
  if (d == 0) {
    out.cross_check = 0.0;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(pm - pn, Eigen::EigenvaluesOnly);
  out.value = es.eigenvalues().cwiseAbs().maxCoeff();
  const Matrix id = Matrix::Identity(d, d);
  out.cross_check = std::max(detail::spectral_norm(pm * (id - pn)), detail::spectral_norm(pn * (id - pm)));
  return out;
}

GapResult operator_gap_graph(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DomainError("graph gap needs operators of equal shape");
  auto graph_basis = [](const Matrix& m) {
    const auto n = m.cols();
    Matrix g(n + m.rows(), n);
    g.topRows(n) = Matrix::Identity(n, n);
    g.bottomRows(m.rows()) = m;
    Eigen::HouseholderQR<Matrix> qr(g);
    return Matrix(qr.householderQ() * Matrix::Identity(g.rows(), n));
  };
  return subspace_gap(graph_basis(a), graph_basis(b));
}

GapResult operator_gap_closed_form(const OperatorRep& s, const OperatorRep& t, const EvalOptions& opts) {
  if (s.is_finite() != t.is_finite()) throw DomainError("closed-form gap needs operators with equal domains");
  GapResult out;
  out.route = GapRoute::ClosedForm;
  if (s.is_finite()) {
    const Matrix ds = dense(s);
    const Matrix dt = dense(t);
    if (ds.rows() != dt.rows() || ds.cols() != dt.cols()) {
      throw DomainError("closed-form gap needs operators of equal shape");
    }
    out.value = closed_form_dense(ds, dt);
    return out;
  }
  const std::size_t k = std::max(s.term_support(), t.term_support());
  const Matrix hs = k ? truncated_matrix(s, k) : Matrix(0, 0);
  const Matrix ht = k ? truncated_matrix(t, k) : Matrix(0, 0);
  const DiagSeq tail_s = *block_form(s).tail;
  const DiagSeq tail_t = *block_form(t).tail;
  const std::size_t end = scan_end(k, opts);
  const auto tail = entrywise_gap(tail_s, tail_t, k + 1, end);
  const double head = closed_form_dense(hs, ht);
  out.value = std::max(head, tail.value);
  out.tail_bound = std::max(0.0, tail.value + tail.tail_bound - out.value);
  out.truncation = end;
  return out;
}

GapResult operator_gap_diagonal(const OperatorRep& s, const OperatorRep& t, const EvalOptions& opts) {
  const auto ds = as_diagonal(s);
  const auto dt = as_diagonal(t);
  if (!ds || !dt) throw DomainError("diagonal gap route needs operators diagonal in the standard basis");
  const auto g = entrywise_gap(*ds, *dt, 1, std::max<std::size_t>(opts.prefix, 1));
  GapResult out;
  out.route = GapRoute::Diagonal;
  out.value = g.value;
  out.tail_bound = g.tail_bound;
  out.truncation = std::max<std::size_t>(opts.prefix, 1);
  return out;
}

GapResult operator_gap(const OperatorRep& s, const OperatorRep& t, const EvalOptions& opts) {
  if (s.is_finite() && t.is_finite()) return operator_gap_graph(dense(s), dense(t));
  if (as_diagonal(s) && as_diagonal(t)) return operator_gap_diagonal(s, t, opts);
  return operator_gap_closed_form(s, t, opts);
}

GapBoundReport gap_upper_bound_check(const OperatorRep& s, const OperatorRep& t, const EvalOptions& opts) {
  GapBoundReport out;
  out.difference_norm = operator_norm(add(s, scale_shift(t, -1.0, 0.0)), opts).value;
  out.gap = operator_gap(s, t, opts);
  out.holds = out.gap.upper() <= out.difference_norm + 1e-10;
  return out;
}

}  // namespace minatt

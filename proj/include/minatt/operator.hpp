#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "minatt/diag_seq.hpp"
#include "minatt/scalar.hpp"
#include "minatt/vec.hpp"

namespace minatt {

/// x -> coeff * <x, left> * right, with unit-norm left/right.
struct RankOneTerm {
  Scalar coeff{0.0};
  Vec left;
  Vec right;

  /// Validates unit norms (within 1e-12) and finiteness.
  static RankOneTerm make(Scalar coeff, Vec left, Vec right);

  Vec apply(const Vec& x) const;
  RankOneTerm adjoint() const { return {std::conj(coeff), right, left}; }
  std::size_t support_end() const;

  bool operator==(const RankOneTerm&) const = default;
};

/// Dense finite matrix C^cols -> C^rows.
struct MatrixOp {
  Matrix data;
  bool operator==(const MatrixOp& other) const;
};

/// Diagonal operator on l^2 with maximal domain {x : sum |d_n x_n|^2 < inf}.
struct DiagonalOp {
  DiagSeq seq;
  bool operator==(const DiagonalOp&) const = default;
};

/// base + shift*I + sum of rank-one terms; the base is never itself a sum.
struct SumOp {
  std::variant<MatrixOp, DiagonalOp> base;
  Scalar shift{0.0};
  std::vector<RankOneTerm> terms;
  bool operator==(const SumOp&) const = default;
};

/// A closed densely defined operator from the representable class.
class OperatorRep {
 public:
  using Variant = std::variant<MatrixOp, DiagonalOp, SumOp>;

  static OperatorRep matrix(Matrix data);
  static OperatorRep diagonal(DiagSeq seq);
  static OperatorRep sum(std::variant<MatrixOp, DiagonalOp> base, Scalar shift,
                         std::vector<RankOneTerm> terms);

  const Variant& variant() const { return rep_; }
  bool is_matrix() const { return std::holds_alternative<MatrixOp>(rep_); }
  bool is_diagonal() const { return std::holds_alternative<DiagonalOp>(rep_); }
  bool is_sum() const { return std::holds_alternative<SumOp>(rep_); }

  /// Matrix or matrix-based sum: acts between finite-dimensional spaces.
  bool is_finite() const;
  /// rows/cols for finite operators; nullopt (l^2) otherwise.
  std::optional<std::size_t> rows() const;
  std::optional<std::size_t> cols() const;
  /// Largest index touched by a rank-one term, 0 if none.
  std::size_t term_support() const;

  bool operator==(const OperatorRep&) const = default;

 private:
  explicit OperatorRep(Variant rep) : rep_(std::move(rep)) {}
  Variant rep_;
};

/// Block-diagonal view: for diagonal-based operators the rank-one terms
/// live inside the leading K x K block and indices n > K act by `tail(n)`.
/// Finite operators are entirely `head` and have no tail.
struct BlockForm {
  Matrix head;
  std::optional<DiagSeq> tail;
  std::size_t head_dim() const { return static_cast<std::size_t>(head.cols()); }
};

Vec apply(const OperatorRep& op, const Vec& x);
OperatorRep adjoint(const OperatorRep& op);
/// alpha*T + beta*I on the domain of T.
OperatorRep scale_shift(const OperatorRep& op, Scalar alpha, Scalar beta);
OperatorRep add_rank_one(const OperatorRep& op, RankOneTerm term);
/// Leading N x N compression (rows/cols clipped to the matrix shape).
OperatorRep truncate(const OperatorRep& op, std::size_t n);
Matrix truncated_matrix(const OperatorRep& op, std::size_t n);
/// Sum of two operators with the same domain class.
OperatorRep add(const OperatorRep& a, const OperatorRep& b);
/// Zero operator with the same shape / domain class.
OperatorRep zero_like(const OperatorRep& op);
/// Dense form of a finite operator.
Matrix dense(const OperatorRep& op);

BlockForm block_form(const OperatorRep& op);
/// Inverse of block_form for diagonal tails: base diagonal `tail` with the
/// head block corrected by rank-one terms (SVD of head - diag(tail)).
OperatorRep from_block(const Matrix& head, const DiagSeq& tail);

/// Entry sequence when the operator is diagonal in the standard basis
/// (a diagonal, or a diagonal-based sum whose terms are basis-aligned).
std::optional<DiagSeq> as_diagonal(const OperatorRep& op);

struct NormResult {
  double value = 0.0;
  double tail_bound = 0.0;
};

/// Throws UnboundedError for operators with a diverging tail.
NormResult operator_norm(const OperatorRep& op, const EvalOptions& opts = {});

}  // namespace minatt

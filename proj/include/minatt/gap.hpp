#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "minatt/operator.hpp"

namespace minatt {

enum class GapRoute { Graph, ClosedForm, Diagonal };

std::string_view to_string(GapRoute route);

struct GapResult {
  double value = 0.0;
  GapRoute route = GapRoute::Graph;
  /// Prefix length scanned for operators on l^2.
  std::optional<std::size_t> truncation;
  /// Certified slack: the true gap lies in [value, value + tail_bound].
  double tail_bound = 0.0;
  /// Second evaluation of the same quantity (max-formula for subspaces).
  std::optional<double> cross_check;

  double upper() const { return value + tail_bound; }
};

/// (I + T*T)^{-1} and (I + TT*)^{-1}, with |T (I+T*T)^{-1}| and
/// |T* (I+TT*)^{-1}| (both at most 1/2).
struct DefectPair {
  OperatorRep check;
  OperatorRep hat;
  double cross_norm = 0.0;
  double adjoint_cross_norm = 0.0;
};

DefectPair defect_resolvent(const OperatorRep& t, const EvalOptions& opts = {});

/// |P_M - P_N| for subspaces given by orthonormal columns of a common ambient
/// space. The max-formula value is returned in `cross_check`.
GapResult subspace_gap(const Matrix& m_basis, const Matrix& n_basis);

/// Gap through explicit orthonormal bases of the graphs {(x, Ax)}.
GapResult operator_gap_graph(const Matrix& a, const Matrix& b);

/// max{ |T^^(1/2) (T - S) Sv^(1/2)|, |S^^(1/2) (S - T) Tv^(1/2)| } for operators
/// with equal domains, Tv = (I+T*T)^{-1} and T^ = (I+TT*)^{-1}.
GapResult operator_gap_closed_form(const OperatorRep& s, const OperatorRep& t, const EvalOptions& opts = {});

/// Entrywise sup_n |t_n - s_n| / (sqrt(1+|t_n|^2) sqrt(1+|s_n|^2)) for operators
/// diagonal in the standard basis, with a tail bound from the tail metadata.
GapResult operator_gap_diagonal(const OperatorRep& s, const OperatorRep& t, const EvalOptions& opts = {});

/// Graph route for finite operators, diagonal route when both are diagonal,
/// closed form otherwise.
GapResult operator_gap(const OperatorRep& s, const OperatorRep& t, const EvalOptions& opts = {});

struct GapBoundReport {
  GapResult gap;
  double difference_norm = 0.0;
  bool holds = false;
};

/// theta(S, T) <= |S - T| for a bounded difference; UnboundedError otherwise.
GapBoundReport gap_upper_bound_check(const OperatorRep& s, const OperatorRep& t, const EvalOptions& opts = {});

}  // namespace minatt

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "minatt/operator.hpp"

namespace minatt {

/// Minimum modulus m(T) = inf{ |Tx| : |x| = 1, x in D(T) } with evidence.
struct AttainmentCertificate {
  double value = 0.0;
  bool attained = false;
  std::optional<Vec> witness;
  /// Set when the witness is a standard basis vector e_k.
  std::optional<std::size_t> witness_index;
  /// |T w| - m(T) for the witness; 0 without one.
  double residual = 0.0;
};

AttainmentCertificate minimum_modulus(const OperatorRep& op, const EvalOptions& opts = {});

struct AttainmentDecision {
  bool attained = false;
  AttainmentCertificate certificate;
  /// For positive operators: attained iff m(T) is an eigenvalue at truncation.
  std::optional<bool> eigenvalue_consistent;
};

AttainmentDecision is_minimum_attaining(const OperatorRep& op, const EvalOptions& opts = {});

struct PositivityCheck {
  bool positive = false;
  /// Most negative eigenvalue / entry seen, or the Hermitian defect.
  double worst = 0.0;
  std::string detail;
};

PositivityCheck check_positive(const OperatorRep& op, const EvalOptions& opts = {});
bool is_self_adjoint(const OperatorRep& op, const EvalOptions& opts = {});
/// inf <Tx, x> over the unit sphere of a self-adjoint operator.
double numerical_range_infimum(const OperatorRep& op, const EvalOptions& opts = {});

/// Positive square root. Throws NotPositiveError with the violating value.
OperatorRep square_root(const OperatorRep& op, const EvalOptions& opts = {});
/// |T| = (T*T)^(1/2).
OperatorRep modulus(const OperatorRep& op, const EvalOptions& opts = {});

struct PolarParts {
  OperatorRep isometry;
  OperatorRep modulus;
};

/// T = V|T| with V a partial isometry whose initial space is the closure of R(|T|).
PolarParts polar(const OperatorRep& op, const EvalOptions& opts = {});

struct Eigenvalue {
  double value = 0.0;
  std::size_t multiplicity = 1;
};

struct EssentialSet {
  std::vector<double> points;
  bool unbounded = false;
};

struct SpectrumReport {
  std::vector<Eigenvalue> discrete;
  EssentialSet essential;
  /// Accumulation points read off the truncation's eigenvalue density.
  std::vector<double> detected;
  std::size_t truncation = 0;
};

/// Clusters of at least `min_count` eigenvalues inside a window of width
/// 2*`radius`; each cluster reports the median of its densest window.
std::vector<double> detect_accumulation(std::vector<double> eigenvalues, double radius = 1e-3,
                                        std::size_t min_count = 0);

/// Self-adjoint input only; throws DomainError otherwise.
SpectrumReport essential_spectrum(const OperatorRep& op, const EvalOptions& opts = {});

struct WeylReport {
  SpectrumReport original;
  SpectrumReport perturbed;
  bool declared_agree = false;
  bool detection_matches = false;
  bool agree() const { return declared_agree && detection_matches; }
};

/// Compares essential spectra of A and A + C for a Hermitian finite-rank C
/// (a sum with zero base, zero shift and rank-one terms).
WeylReport weyl_check(const OperatorRep& a, const OperatorRep& c, const EvalOptions& opts = {});

/// Declared essential points agree within 1e-6 and detected within 1e-3.
bool same_points(const std::vector<double>& a, const std::vector<double>& b, double tol);

}  // namespace minatt

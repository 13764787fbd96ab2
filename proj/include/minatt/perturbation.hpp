#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minatt/operator.hpp"
#include "minatt/spectral.hpp"

namespace minatt {

/// Which branch of the construction produced S.
enum class PerturbationCase {
  Case1,                // positive, m(T) > 0: S = -eps <., x> x
  Case2,                // positive, not injective: S = 0
  Case3,                // positive, injective, m(T) = 0: S = (eps/2) I - C
  GeneralVA,            // S = V A from the polar decomposition
  BoundedBelowRankOne,  // m(T) > 0: S = V A with A rank one
};

std::string_view to_string(PerturbationCase c);
PerturbationCase perturbation_case_from_string(std::string_view s);

/// A named claim together with what was measured and the bound it was held to.
struct Check {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double bound = 0.0;
  std::string detail;
};

struct PerturbationResult {
  OperatorRep perturbation;  // S
  OperatorRep perturbed;     // T + S
  PerturbationCase case_tag = PerturbationCase::Case2;
  /// Case chosen for |T| on the polar routes.
  std::optional<PerturbationCase> inner_case{};
  double epsilon = 0.0;
  /// eps' of the inner rank-one cap when it differs from epsilon.
  std::optional<double> inner_epsilon{};
  AttainmentCertificate witness{};  // for T + S
  double norm_s = 0.0;
  double gap_bound = 0.0;
  /// Claims certified while constructing S.
  std::vector<Check> certification{};

  bool certified() const;
};

/// Unit x with <Tx, x> < m(T) + eps/2 for positive T, 0 < eps < m(T).
/// Diagonal parts pick the smallest qualifying index; finite blocks the
/// eigenvector of the smallest eigenvalue.
Vec near_minimizer(const OperatorRep& t, double epsilon, const EvalOptions& opts = {});

/// eps <., x> x for a unit vector x.
RankOneTerm rank_one_cap(double epsilon, const Vec& x);

PerturbationResult attainment_perturbation_positive(const OperatorRep& t, double epsilon,
                                                    const EvalOptions& opts = {});
PerturbationResult attainment_perturbation(const OperatorRep& t, double epsilon, const EvalOptions& opts = {});
PerturbationResult bounded_below_perturbation(const OperatorRep& t, double epsilon, const EvalOptions& opts = {});

struct VerificationReport {
  std::vector<Check> checks;  // norm, attained, gap
  bool passed() const;
};

/// Independent re-check of |S| <= eps, T + S minimum attaining and
/// theta(T + S, T) <= eps. Failures are reported, never thrown.
VerificationReport verify_perturbation(const OperatorRep& t, const PerturbationResult& r,
                                       const EvalOptions& opts = {});

}  // namespace minatt

#include "minatt/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "linalg.hpp"
#include "minatt/errors.hpp"
#include "minatt/gap.hpp"

namespace minatt {

namespace {

constexpr double kNullTol = 1e-12;
// <T x_eps, x_eps> must undercut m(T) + eps/2 by at least this much.
constexpr double kStrictMargin = 1e-12;
constexpr std::size_t kMaxMinimizerScan = 100'000'000;

Check make_check(std::string name, bool pass, double measured, double bound, std::string detail = {}) {
  return {std::move(name), pass, measured, bound, std::move(detail)};
}

Check le_check(std::string name, double measured, double bound) {
  return make_check(std::move(name), measured <= bound, measured, bound);
}

std::size_t term_count(const OperatorRep& op) {
  if (const auto* s = std::get_if<SumOp>(&op.variant())) return s->terms.size();
  return 0;
}

Scalar shift_of(const OperatorRep& op) {
  if (const auto* s = std::get_if<SumOp>(&op.variant())) return s->shift;
  return 0.0;
}

// (shift) I + cap on top of a zero base of T's shape.
OperatorRep shifted_zero(const OperatorRep& t, Scalar shift, RankOneTerm cap) {
  const OperatorRep z = zero_like(t);
  std::variant<MatrixOp, DiagonalOp> base = DiagonalOp{DiagSeq::zero()};
  if (z.is_matrix()) base = std::get<MatrixOp>(z.variant());
  return OperatorRep::sum(std::move(base), shift, {std::move(cap)});
}

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be a positive finite number");
}

void finish(PerturbationResult& r, const OperatorRep& t, const EvalOptions& opts) {
  r.witness = minimum_modulus(r.perturbed, opts);
  r.norm_s = operator_norm(r.perturbation, opts).value;
  r.gap_bound = operator_gap(r.perturbed, t, opts).upper();
  r.certification.push_back(le_check("norm", r.norm_s, r.epsilon + kExactTol));
  r.certification.push_back(make_check("attained", r.witness.attained, r.witness.value, 0.0,
                                       r.witness.attained ? "witness found" : "infimum not attained"));
  r.certification.push_back(le_check("gap", r.gap_bound, r.epsilon + 1e-10));
}

}  // namespace

std::string_view to_string(PerturbationCase c) {
  switch (c) {
    case PerturbationCase::Case1:
      return "Case1";
    case PerturbationCase::Case2:
      return "Case2";
    case PerturbationCase::Case3:
      return "Case3";
    case PerturbationCase::GeneralVA:
      return "GeneralVA";
    case PerturbationCase::BoundedBelowRankOne:
      return "BoundedBelowRankOne";
  }
  return "unknown";
}

PerturbationCase perturbation_case_from_string(std::string_view s) {
  for (auto c : {PerturbationCase::Case1, PerturbationCase::Case2, PerturbationCase::Case3,
                 PerturbationCase::GeneralVA, PerturbationCase::BoundedBelowRankOne}) {
    if (to_string(c) == s) return c;
  }
  throw DomainError("unknown perturbation case '" + std::string(s) + "'");
}

bool PerturbationResult::certified() const {
  return std::all_of(certification.begin(), certification.end(), [](const Check& c) { return c.pass; });
}

bool VerificationReport::passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

Vec near_minimizer(const OperatorRep& t, double epsilon, const EvalOptions& opts) {
  require_epsilon(epsilon);
  const auto pos = check_positive(t, opts);
  if (!pos.positive) throw NotPositiveError("near minimizer needs a positive operator: " + pos.detail, pos.worst);
  const double m = minimum_modulus(t, opts).value;
  if (m <= kNullTol) throw DomainError("near minimizer needs m(T) > 0");
  if (epsilon >= m) throw DomainError("near minimizer needs 0 < epsilon < m(T)");
  const double threshold = m + epsilon / 2.0 - kStrictMargin;

  const BlockForm bf = block_form(t);
  if (bf.head.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (bf.head + bf.head.adjoint()));
    if (es.eigenvalues()(0) < threshold) {
      const DenseVector v = detail::normalize_phase(es.eigenvectors().col(0));
      return Vec::from_dense(v / v.norm(), t.cols());
    }
  }
  if (bf.tail) {
    for (std::size_t n = bf.head_dim() + 1; n <= kMaxMinimizerScan; ++n) {
      if ((*bf.tail)(n).real() < threshold) return Vec::basis(n);
    }
  }
  throw InconclusiveError("no index undercuts m(T) + eps/2 within the scan limit", m, threshold);
}

RankOneTerm rank_one_cap(double epsilon, const Vec& x) {
  require_epsilon(epsilon);
  if (std::abs(x.norm() - 1.0) > kExactTol) throw DomainError("rank-one cap needs a unit vector");
  return RankOneTerm::make(epsilon, x, x);
}

PerturbationResult attainment_perturbation_positive(const OperatorRep& t, double epsilon, const EvalOptions& opts) {
  require_epsilon(epsilon);
  const auto pos = check_positive(t, opts);
  if (!pos.positive) throw NotPositiveError("positive construction needs a positive operator: " + pos.detail, pos.worst);
  const auto cert = minimum_modulus(t, opts);
  const double m = cert.value;

  PerturbationResult r{.perturbation = zero_like(t), .perturbed = t};
  r.epsilon = epsilon;

  if (m <= kNullTol && cert.attained) {
    r.case_tag = PerturbationCase::Case2;
    finish(r, t, opts);
    return r;
  }

  if (m > kNullTol) {
    r.case_tag = PerturbationCase::Case1;
    const double eps = epsilon < m ? epsilon : m / 2.0;
    if (eps != epsilon) r.inner_epsilon = eps;
    const Vec x = near_minimizer(t, eps, opts);
    RankOneTerm cap = rank_one_cap(eps, x);
    cap.coeff = -cap.coeff;
    r.perturbation = add_rank_one(zero_like(t), cap);
    r.perturbed = add_rank_one(t, cap);
    finish(r, t, opts);
    const double dropped = r.witness.value;
    r.certification.push_back(make_check("below_m_minus_half_eps", dropped < m - eps / 2.0, dropped, m - eps / 2.0));
    const double floor = numerical_range_infimum(r.perturbed, opts);
    r.certification.push_back(
        make_check("lower_bound", floor >= m - eps - 1e-10, floor, m - eps, "T + S >= (m(T) - eps) I"));
    return r;
  }

  // Injective with m(T) = 0: run the m > 0 construction on T + (eps/2) I.
  r.case_tag = PerturbationCase::Case3;
  const double half = epsilon / 2.0;
  const double inner = epsilon / 4.0;
  r.inner_epsilon = inner;
  const OperatorRep shifted = scale_shift(t, 1.0, half);
  const Vec x = near_minimizer(shifted, inner, opts);
  RankOneTerm cap = rank_one_cap(inner, x);
  cap.coeff = -cap.coeff;
  r.perturbation = shifted_zero(t, half, cap);
  r.perturbed = add_rank_one(shifted, cap);
  finish(r, t, opts);
  r.certification.push_back(make_check("positive_minimum", r.witness.value > 0.0, r.witness.value, 0.0));
  return r;
}

PerturbationResult attainment_perturbation(const OperatorRep& t, double epsilon, const EvalOptions& opts) {
  require_epsilon(epsilon);
  const PolarParts parts = polar(t, opts);
  const PerturbationResult inner = attainment_perturbation_positive(parts.modulus, epsilon, opts);

  PerturbationResult r{.perturbation = zero_like(t), .perturbed = t};
  r.epsilon = epsilon;
  r.inner_case = inner.case_tag;
  r.inner_epsilon = inner.inner_epsilon;
  if (inner.case_tag == PerturbationCase::Case2) {
    r.case_tag = PerturbationCase::Case2;
    finish(r, t, opts);
    return r;
  }

  // S = V A: the shift of A becomes a multiple of V, each term's range vector is pushed through V.
  r.case_tag = PerturbationCase::GeneralVA;
  const Scalar a_shift = shift_of(inner.perturbation);
  OperatorRep s = a_shift == Scalar(0.0) ? zero_like(t) : scale_shift(parts.isometry, a_shift, 0.0);
  for (const auto& term : std::get<SumOp>(inner.perturbation.variant()).terms) {
    Vec image = apply(parts.isometry, term.right);
    image = image.scaled(1.0 / image.norm());
    s = add_rank_one(s, RankOneTerm::make(term.coeff, term.left, image));
  }
  r.perturbation = s;
  r.perturbed = add(t, s);
  finish(r, t, opts);
  const double modulus_side = inner.witness.value;
  r.certification.push_back(make_check("polar_minimum", std::abs(r.witness.value - modulus_side) <= 1e-10,
                                       r.witness.value, modulus_side, "m(T + S) = m(|T| + A)"));
  if (inner.case_tag == PerturbationCase::Case1) {
    const bool rank_one = term_count(r.perturbation) == 1 && shift_of(r.perturbation) == Scalar(0.0);
    r.certification.push_back(make_check("rank_one", rank_one, double(term_count(r.perturbation)), 1.0));
  }
  return r;
}

PerturbationResult bounded_below_perturbation(const OperatorRep& t, double epsilon, const EvalOptions& opts) {
  require_epsilon(epsilon);
  const double m = minimum_modulus(t, opts).value;
  if (m <= kNullTol) throw DomainError("operator is not bounded below (m(T) = 0)");
  PerturbationResult r = attainment_perturbation(t, epsilon, opts);
  r.case_tag = PerturbationCase::BoundedBelowRankOne;
  return r;
}

VerificationReport verify_perturbation(const OperatorRep& t, const PerturbationResult& r, const EvalOptions& opts) {
  VerificationReport out;
  const double eps = r.epsilon;
  try {
    const double norm = operator_norm(r.perturbation, opts).value;
    out.checks.push_back(le_check("norm", norm, eps + kExactTol));
  } catch (const std::exception& e) {
    out.checks.push_back(make_check("norm", false, 0.0, eps, e.what()));
  }
  std::optional<OperatorRep> sum;
  try {
    sum = add(t, r.perturbation);
  } catch (const std::exception& e) {
    out.checks.push_back(make_check("attained", false, 0.0, 0.0, e.what()));
    out.checks.push_back(make_check("gap", false, 0.0, eps, e.what()));
    return out;
  }
  try {
    const auto decision = is_minimum_attaining(*sum, opts);
    const bool consistent = decision.eigenvalue_consistent.value_or(true);
    out.checks.push_back(make_check("attained", decision.attained && consistent, decision.certificate.value, 0.0,
                                    consistent ? "" : "eigenvalue cross-check disagrees"));
  } catch (const std::exception& e) {
    out.checks.push_back(make_check("attained", false, 0.0, 0.0, e.what()));
  }
  try {
    const auto gap = operator_gap(*sum, t, opts);
    out.checks.push_back(le_check("gap", gap.upper(), eps + 1e-10));
  } catch (const std::exception& e) {
    out.checks.push_back(make_check("gap", false, 0.0, eps, e.what()));
  }
  return out;
}

}  // namespace minatt

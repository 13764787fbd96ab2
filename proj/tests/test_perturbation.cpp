#include <cmath>
#include <random>

#include "doctest.h"
#include "minatt/errors.hpp"
#include "minatt/gap.hpp"
#include "minatt/perturbation.hpp"
#include "support/oracles.hpp"

using namespace minatt;

namespace {

const Scalar I(0.0, 1.0);

OperatorRep diag_key(const char* key) { return OperatorRep::diagonal(DiagSeq::from_registry(key)); }

const std::vector<RankOneTerm>& terms_of(const OperatorRep& op) { return std::get<SumOp>(op.variant()).terms; }

Scalar diagonal_entry(const OperatorRep& op, std::size_t k) { return apply(op, Vec::basis(k)).at(k); }

// smallest n with 1/n < bound
std::size_t first_index_below(double bound) {
  std::size_t n = 1;
  while (!(1.0 / double(n) < bound)) ++n;
  return n;
}

}  // namespace

TEST_CASE("near minimizer") {
  const auto t = diag_key("one_plus_inv_n");
  CHECK(near_minimizer(t, 0.5) == Vec::basis(5));
  CHECK(near_minimizer(t, 0.1) == Vec::basis(21));

  Matrix m = Matrix::Zero(3, 3);
  m.diagonal() << 2, 3, 5;
  for (double eps : {0.1, 1.0, 1.9}) {
    const Vec x = near_minimizer(OperatorRep::matrix(m), eps);
    CHECK(x == Vec::basis(1, 3));
  }
  CHECK_THROWS_AS(near_minimizer(t, 1.5), DomainError);
  CHECK_THROWS_AS(near_minimizer(diag_key("inv_n"), 0.1), DomainError);
  CHECK_THROWS_AS(near_minimizer(scale_shift(t, -1.0, 0.0), 0.1), NotPositiveError);
}

TEST_CASE("rank-one cap") {
  const auto c = rank_one_cap(0.5, Vec::basis(5));
  const auto op = OperatorRep::sum(DiagonalOp{DiagSeq::zero()}, 0.0, {c});
  CHECK(std::abs(operator_norm(op).value - 0.5) <= 1e-12);
  CHECK(std::abs(c.apply(Vec::basis(5)).at(5) - 0.5) <= 1e-12);
  CHECK(c.apply(Vec::basis(1)).norm() == 0.0);

  const double r = 1.0 / std::sqrt(2.0);
  const auto tilted = rank_one_cap(1.0, Vec({{1, r}, {2, r}}));
  const Matrix block = truncated_matrix(OperatorRep::sum(DiagonalOp{DiagSeq::zero()}, 0.0, {tilted}), 2);
  CHECK((block - Matrix::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(rank_one_cap(0.5, Vec::basis(1).scaled(2.0)), DomainError);
  CHECK_THROWS_AS(rank_one_cap(-0.5, Vec::basis(1)), DomainError);
}

TEST_CASE("positive construction, case 1") {
  const auto t = diag_key("one_plus_inv_n");
  const auto r = attainment_perturbation_positive(t, 0.5);
  CHECK(r.case_tag == PerturbationCase::Case1);
  CHECK(r.certified());
  REQUIRE(terms_of(r.perturbation).size() == 1);
  const auto& term = terms_of(r.perturbation)[0];
  CHECK(term.coeff == Scalar(-0.5));
  CHECK(term.left == Vec::basis(5));
  CHECK(term.right == Vec::basis(5));
  CHECK(std::abs(r.witness.value - 0.7) <= 1e-12);
  CHECK(r.witness.attained);
  CHECK(*r.witness.witness_index == 5);
  CHECK(r.witness.value < 1.0 - 0.25);
  CHECK(std::abs(r.norm_s - 0.5) <= 1e-12);
  CHECK(r.gap_bound <= 0.5);
  CHECK(verify_perturbation(t, r).passed());
}

TEST_CASE("positive construction, epsilon above m(T)") {
  const auto t = diag_key("one_plus_inv_n");
  const auto r = attainment_perturbation_positive(t, 3.0);
  CHECK(r.case_tag == PerturbationCase::Case1);
  REQUIRE(r.inner_epsilon);
  CHECK(*r.inner_epsilon == 0.5);
  CHECK(r.norm_s <= 3.0);
  CHECK(r.certified());
}

TEST_CASE("positive construction, case 2") {
  const auto t = OperatorRep::diagonal(DiagSeq::from_registry("linear_n").affine(1.0, -1.0));
  const auto r = attainment_perturbation_positive(t, 0.5);
  CHECK(r.case_tag == PerturbationCase::Case2);
  CHECK(r.norm_s == 0.0);
  CHECK(r.witness.attained);
  CHECK(*r.witness.witness_index == 1);
  const auto v = verify_perturbation(t, r);
  CHECK(v.passed());
  CHECK(r.gap_bound == 0.0);
}

TEST_CASE("positive construction, case 3") {
  const auto t = diag_key("inv_n");
  const auto r = attainment_perturbation_positive(t, 0.5);
  CHECK(r.case_tag == PerturbationCase::Case3);
  CHECK(*r.inner_epsilon == 0.125);
  const auto& sum = std::get<SumOp>(r.perturbation.variant());
  CHECK(sum.shift == Scalar(0.25));
  REQUIRE(sum.terms.size() == 1);
  CHECK(sum.terms[0].coeff == Scalar(-0.125));
  CHECK(sum.terms[0].left == Vec::basis(first_index_below(0.0625)));
  CHECK(first_index_below(0.0625) == 17);
  CHECK(std::abs(r.witness.value - (1.0 / 17.0 + 0.125)) <= 1e-12);
  CHECK(*r.witness.witness_index == 17);
  CHECK(std::abs(r.norm_s - 0.25) <= 1e-12);
  CHECK(r.certified());
  CHECK(verify_perturbation(t, r).passed());
}

TEST_CASE("general construction") {
  SUBCASE("negative diagonal") {
    const auto t = scale_shift(diag_key("one_plus_inv_n"), -1.0, 0.0);
    const auto r = attainment_perturbation(t, 0.5);
    CHECK(r.case_tag == PerturbationCase::GeneralVA);
    CHECK(*r.inner_case == PerturbationCase::Case1);
    CHECK(std::abs(diagonal_entry(r.perturbed, 5) + 0.7) <= 1e-12);
    CHECK(std::abs(r.witness.value - 0.7) <= 1e-12);
    CHECK(r.certified());
  }
  SUBCASE("not injective") {
    const auto t = OperatorRep::diagonal(DiagSeq::from_registry("one_plus_inv_n").affine(-1.0, 0.0).with_override(2, 0.0));
    const auto r = attainment_perturbation(t, 0.5);
    CHECK(r.case_tag == PerturbationCase::Case2);
    CHECK(r.perturbed == t);
  }
  SUBCASE("2x2 matrix") {
    Matrix m(2, 2);
    m << 0, -2, 1, 0;
    const auto t = OperatorRep::matrix(m);
    const auto r = attainment_perturbation(t, 0.3);
    REQUIRE(terms_of(r.perturbation).size() == 1);
    const auto& term = terms_of(r.perturbation)[0];
    CHECK(term.coeff == Scalar(-0.3));
    CHECK(term.left == Vec::basis(1, 2));
    CHECK((term.right + Vec::basis(2, 2).scaled(-1.0)).norm() <= 1e-12);  // V e_1 = e_2
    CHECK(std::abs(r.witness.value - 0.7) <= 1e-12);
    CHECK(oracle::min_modulus(dense(r.perturbed)) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(r.certified());
  }
  SUBCASE("injective with m(T) = 0 and a phase") {
    const auto t = OperatorRep::diagonal(DiagSeq::from_registry("inv_n").affine(-I, 0.0));
    const auto r = attainment_perturbation(t, 0.5);
    CHECK(*r.inner_case == PerturbationCase::Case3);
    CHECK(r.witness.attained);
    CHECK(r.witness.value > 0.0);
    CHECK(r.norm_s <= 0.5 + 1e-12);
    CHECK(verify_perturbation(t, r).passed());
  }
}

TEST_CASE("bounded below construction") {
  const auto t = diag_key("one_plus_inv_n");
  const auto r = bounded_below_perturbation(t, 0.5);
  CHECK(r.case_tag == PerturbationCase::BoundedBelowRankOne);
  CHECK(r.perturbation == attainment_perturbation_positive(t, 0.5).perturbation);

  const auto rot = OperatorRep::diagonal(DiagSeq::from_registry("one_plus_inv_n").affine(I, 0.0));
  const auto rr = bounded_below_perturbation(rot, 0.5);
  REQUIRE(terms_of(rr.perturbation).size() == 1);
  CHECK(std::abs(diagonal_entry(rr.perturbation, 5) + 0.5 * I) <= 1e-12);
  CHECK(std::abs(rr.witness.value - 0.7) <= 1e-12);
  CHECK(rr.certified());

  CHECK_THROWS_AS(bounded_below_perturbation(diag_key("inv_n"), 0.5), DomainError);
}

TEST_CASE("verification catches a corrupted perturbation") {
  const auto t = diag_key("one_plus_inv_n");
  auto r = attainment_perturbation_positive(t, 0.5);
  auto sum = std::get<SumOp>(r.perturbation.variant());
  sum.terms[0].coeff *= 2.0;
  r.perturbation = OperatorRep::sum(sum.base, sum.shift, sum.terms);
  const auto v = verify_perturbation(t, r);
  CHECK_FALSE(v.passed());
  CHECK(v.checks[0].name == "norm");
  CHECK_FALSE(v.checks[0].pass);
  CHECK(std::abs(v.checks[0].measured - 1.0) <= 1e-12);
}

TEST_CASE("determinism and monotone witnesses") {
  const auto t = diag_key("one_plus_inv_n");
  CHECK(attainment_perturbation(t, 0.1).perturbation == attainment_perturbation(t, 0.1).perturbation);
  std::size_t previous = 0;
  for (double eps = 0.8; eps > 1e-3; eps /= 2.0) {
    const auto r = attainment_perturbation_positive(t, eps);
    CHECK(verify_perturbation(t, r).passed());
    const std::size_t idx = *r.witness.witness_index;
    CHECK(idx == first_index_below(eps / 2.0));
    CHECK(idx >= previous);
    previous = idx;
  }
}

TEST_CASE("case names") {
  for (auto c : {PerturbationCase::Case1, PerturbationCase::Case2, PerturbationCase::Case3,
                 PerturbationCase::GeneralVA, PerturbationCase::BoundedBelowRankOne}) {
    CHECK(perturbation_case_from_string(to_string(c)) == c);
  }
  CHECK_THROWS_AS(perturbation_case_from_string("Case4"), DomainError);
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "minatt/errors.hpp"
#include "minatt/operator.hpp"
#include "support/oracles.hpp"

using namespace minatt;

namespace {

const Scalar I(0.0, 1.0);

OperatorRep diag_key(const char* key) { return OperatorRep::diagonal(DiagSeq::from_registry(key)); }

bool same_action(const Vec& a, const Vec& b, double tol = kExactTol) { return (a + b.scaled(-1.0)).norm() <= tol; }

}  // namespace

TEST_CASE("vec basics") {
  const Vec e3 = Vec::basis(3);
  CHECK(e3.norm() == 1.0);
  CHECK(e3.support_end() == 3);
  CHECK(e3.at(2) == Scalar(0.0));
  CHECK_FALSE(e3.dim().has_value());

  Vec v({{1, 3.0}, {4, Scalar(0.0, 4.0)}}, 5);
  CHECK(v.norm() == doctest::Approx(5.0));
  CHECK(inner(v, v) == Scalar(25.0));
  CHECK(v.to_dense(5)(3) == Scalar(0.0, 4.0));
  CHECK_THROWS_AS(v.to_dense(3), DomainError);

  CHECK_THROWS_AS(Vec::basis(0), DomainError);
  CHECK_THROWS_AS(Vec({{2, 1.0}, {1, 1.0}}), DomainError);
  CHECK_THROWS_AS(Vec({{3, 1.0}}, 2), DomainError);

  // merged supports cancel exact zeros
  const Vec sum = Vec::basis(2) + Vec::basis(2).scaled(-1.0);
  CHECK(sum.norm() == 0.0);
}

TEST_CASE("apply on each variant") {
  SUBCASE("diagonal on a basis vector") {
    const Vec y = apply(diag_key("one_plus_inv_n"), Vec::basis(5));
    CHECK(std::abs(y.at(5) - 1.2) <= kExactTol);
    CHECK(y.entries().size() == 1);
  }
  SUBCASE("matrix") {
    Matrix m(2, 2);
    m << 1, 1, 0, 1;
    const Vec y = apply(OperatorRep::matrix(m), Vec({{1, 1.0}, {2, 1.0}}, 2));
    CHECK(y.at(1) == Scalar(2.0));
    CHECK(y.at(2) == Scalar(1.0));
  }
  SUBCASE("shifted sum") {
    const auto op = OperatorRep::sum(DiagonalOp{DiagSeq::from_registry("inv_n")}, 0.25, {});
    CHECK(std::abs(apply(op, Vec::basis(4)).at(4) - 0.5) <= kExactTol);
  }
}

TEST_CASE("adjoint") {
  const auto d = OperatorRep::diagonal(DiagSeq::constant(3.0 * I));
  CHECK(apply(adjoint(d), Vec::basis(7)).at(7) == -3.0 * I);

  const auto term = RankOneTerm::make(2.0, Vec::basis(1), Vec::basis(2));
  const Vec back = term.adjoint().apply(Vec::basis(2));
  CHECK(back.at(1) == Scalar(2.0));
  CHECK(back.entries().size() == 1);

  std::mt19937_64 rng(7);
  const Matrix m = oracle::random_matrix(rng, 3, 4);
  const std::vector<OperatorRep> ops = {
      OperatorRep::matrix(m),
      diag_key("one_plus_inv_n"),
      add_rank_one(diag_key("inv_n"), RankOneTerm::make(I, Vec::basis(2), Vec::basis(3))),
      add_rank_one(OperatorRep::matrix(m), RankOneTerm::make(0.5, Vec::basis(4, 4), Vec::basis(1, 3))),
  };
  for (const auto& op : ops) CHECK(adjoint(adjoint(op)) == op);
}

TEST_CASE("scale_shift") {
  const auto t = diag_key("inv_n");
  CHECK(scale_shift(t, 1.0, 0.0) == t);
  const auto shifted = scale_shift(t, 1.0, 0.25);
  CHECK(std::abs(apply(shifted, Vec::basis(4)).at(4) - 0.5) <= kExactTol);
  Matrix rect = Matrix::Ones(2, 3);
  CHECK_THROWS_AS(scale_shift(OperatorRep::matrix(rect), 1.0, 1.0), DomainError);
}

TEST_CASE("add_rank_one") {
  const auto t = diag_key("one_plus_inv_n");
  const auto s = add_rank_one(t, RankOneTerm::make(-0.5, Vec::basis(5), Vec::basis(5)));
  CHECK(std::abs(apply(s, Vec::basis(5)).at(5) - 0.7) <= kExactTol);

  const auto unchanged = add_rank_one(t, RankOneTerm::make(0.0, Vec::basis(2), Vec::basis(3)));
  for (std::size_t k = 1; k <= 6; ++k) CHECK(same_action(apply(unchanged, Vec::basis(k)), apply(t, Vec::basis(k))));

  const auto a = RankOneTerm::make(0.3, Vec::basis(1), Vec::basis(2));
  const auto b = RankOneTerm::make(-I, Vec::basis(3), Vec::basis(1));
  const Vec x({{1, 1.0}, {2, 2.0}, {3, Scalar(0.5, -1.0)}});
  CHECK(same_action(apply(add_rank_one(add_rank_one(t, a), b), x), apply(add_rank_one(add_rank_one(t, b), a), x)));

  CHECK_THROWS_AS(RankOneTerm::make(1.0, Vec::basis(1).scaled(2.0), Vec::basis(1)), DomainError);
  Matrix m = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(add_rank_one(OperatorRep::matrix(m), RankOneTerm::make(1.0, Vec::basis(3), Vec::basis(1))),
                  DomainError);
}

TEST_CASE("truncate") {
  const Matrix d = truncated_matrix(diag_key("one_plus_inv_n"), 3);
  CHECK(d(0, 0) == Scalar(2.0));
  CHECK(d(1, 1) == Scalar(1.5));
  CHECK(std::abs(d(2, 2) - 4.0 / 3.0) <= kExactTol);
  CHECK(d(0, 1) == Scalar(0.0));

  std::mt19937_64 rng(3);
  const Matrix m = oracle::random_matrix(rng, 3, 3);
  CHECK(truncated_matrix(OperatorRep::matrix(m), 3) == m);

  const auto s = add_rank_one(diag_key("one_plus_inv_n"), RankOneTerm::make(-0.5, Vec::basis(5), Vec::basis(5)));
  CHECK(std::abs(truncated_matrix(s, 5)(4, 4) - 0.7) <= kExactTol);
  CHECK_THROWS_AS(truncated_matrix(s, 4), DomainError);
  CHECK_THROWS_AS(truncated_matrix(s, 0), DomainError);
}

TEST_CASE("operator norm") {
  const auto cap = OperatorRep::sum(DiagonalOp{DiagSeq::zero()}, 0.0,
                                    {RankOneTerm::make(0.5, Vec::basis(5), Vec::basis(5))});
  CHECK(std::abs(operator_norm(cap).value - 0.5) <= kExactTol);
  CHECK(std::abs(operator_norm(diag_key("one_plus_inv_n")).value - 2.0) <= kExactTol);
  CHECK(operator_norm(OperatorRep::diagonal(DiagSeq::zero())).value == 0.0);
  CHECK(operator_norm(OperatorRep::matrix(Matrix::Zero(3, 2))).value == 0.0);
  CHECK_THROWS_AS(operator_norm(diag_key("linear_n")), UnboundedError);
}

TEST_CASE("block form round trip") {
  std::mt19937_64 rng(11);
  const auto t = add_rank_one(
      add_rank_one(diag_key("one_plus_inv_n"), RankOneTerm::make(0.4, Vec::basis(2), Vec::basis(3))),
      RankOneTerm::make(-I, Vec({{1, 0.6}, {4, 0.8}}), Vec::basis(1)));
  const BlockForm bf = block_form(t);
  CHECK(bf.head_dim() == 4);
  REQUIRE(bf.tail);
  const OperatorRep back = from_block(bf.head, *bf.tail);
  CHECK((truncated_matrix(back, 12) - truncated_matrix(t, 12)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("as_diagonal folds basis-aligned terms") {
  const auto s = add_rank_one(diag_key("one_plus_inv_n"), RankOneTerm::make(-0.5, Vec::basis(5), Vec::basis(5)));
  const auto d = as_diagonal(s);
  REQUIRE(d);
  CHECK(std::abs((*d)(5) - 0.7) <= kExactTol);
  CHECK(std::abs((*d)(6) - (1.0 + 1.0 / 6.0)) <= kExactTol);

  const auto off = add_rank_one(diag_key("inv_n"), RankOneTerm::make(1.0, Vec::basis(1), Vec::basis(2)));
  CHECK_FALSE(as_diagonal(off));
}

TEST_CASE("add") {
  Matrix a = Matrix::Identity(2, 2);
  const auto sum = add(OperatorRep::matrix(a), OperatorRep::matrix(a));
  CHECK(dense(sum) == 2.0 * a);
  CHECK_THROWS_AS(add(OperatorRep::matrix(a), diag_key("inv_n")), DomainError);
  const auto dd = add(diag_key("inv_n"), diag_key("one_plus_inv_n"));
  CHECK(std::abs(apply(dd, Vec::basis(4)).at(4) - 1.5) <= kExactTol);
}

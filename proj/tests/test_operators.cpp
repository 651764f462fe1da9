#include <doctest.h>

#include <random>

#include "gennet/operators.hpp"
#include "gennet/submodules.hpp"
#include "oracles.hpp"

using namespace gennet;

namespace {

GridPtr grid24() { return EpsGrid::geometric(); }

BasicOperator rotation(const GridPtr& g) {
  return BasicOperator::from_function(g, [](std::size_t, double th) {
    Eigen::MatrixXd R(2, 2);
    R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    return R;
  });
}

BasicOperator random_op(std::mt19937_64& rng, const GridPtr& g, Eigen::Index r, Eigen::Index c) {
  std::vector<Eigen::MatrixXd> s(g->size());
  for (auto& m : s) m = oracle::random_matrix(rng, r, c);
  return BasicOperator(g, s);
}

}  // namespace

TEST_CASE("apply") {
  auto g = grid24();
  std::mt19937_64 rng(1);
  const auto u = oracle::random_vector_net(rng, g, 3);
  const auto Iu = apply(BasicOperator::identity(g, 3), u);
  for (std::size_t i = 0; i < 24; ++i) CHECK((Iu[i] - u[i]).norm() == 0.0);
  const auto D = BasicOperator::from_function(g, [](std::size_t, double e) { return Eigen::Vector2d(e, 1.0).asDiagonal().toDenseMatrix(); });
  const auto y = apply(D, GenVector::constant(g, Eigen::Vector2d(1, 1)));
  for (std::size_t i = 0; i < 24; ++i) {
    CHECK(y.real_sample(i)(0) == (*g)[i]);
    CHECK(y.real_sample(i)(1) == 1.0);
  }
  const auto z = apply(BasicOperator::constant(g, Eigen::MatrixXd::Zero(2, 3)), u);
  CHECK(z.dim() == 2);
  for (std::size_t i = 0; i < 24; ++i) CHECK(z[i].norm() == 0.0);
  CHECK_THROWS_AS(apply(D, u), Error);

  // Negligible probes stay negligible.
  NumericPolicy p;
  const auto T = random_op(rng, g, 3, 3);
  const auto tiny = make_power_net(1.0, 12.0, g) * oracle::random_vector_net(rng, g, 3, 0.5);
  CHECK(is_negligible(rnorm(apply(T, tiny)), p));
}

TEST_CASE("adjoint") {
  auto g = grid24();
  NumericPolicy p;
  Eigen::MatrixXd S(2, 2);
  S << 2, 1, 1, 3;
  const auto Ss = adjoint(BasicOperator::constant(g, S));
  CHECK(Ss[0].real() == S);
  Eigen::MatrixXd N(2, 2);
  N << 0, 1, 0, 0;
  CHECK(adjoint(BasicOperator::constant(g, N))[5].real() == N.transpose());

  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const auto A = random_op(rng, g, 3, 4), B = random_op(rng, g, 4, 2);
    const auto lhs = adjoint(A * B), rhs = adjoint(B) * adjoint(A);
    for (std::size_t i = 0; i < 24; ++i) CHECK((lhs[i] - rhs[i]).cwiseAbs().maxCoeff() <= 1e-12 * (1 + lhs[i].norm()));
    const auto u = oracle::random_vector_net(rng, g, 4, 0.0), v = oracle::random_vector_net(rng, g, 3, 0.0);
    const auto d = inner(apply(A, u), v) - inner(u, apply(adjoint(A), v));
    CHECK(is_numerically_negligible(d, p, 100.0));
  }
}

TEST_CASE("operator norm") {
  auto g = grid24();
  const auto n1 = op_norm_net(BasicOperator::identity(g, 3));
  for (std::size_t i = 0; i < 24; ++i) CHECK(n1.re(i) == doctest::Approx(1.0));
  const auto D = BasicOperator::from_function(g, [](std::size_t, double e) { return Eigen::Vector2d(3.0, e).asDiagonal().toDenseMatrix(); });
  for (std::size_t i = 0; i < 24; ++i) CHECK(op_norm_net(D).re(i) == doctest::Approx(3.0));
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd c = oracle::random_vector(rng, 3), r = oracle::random_vector(rng, 5);
    const auto n = op_norm_net(BasicOperator::constant(g, c * r.transpose()));
    CHECK(n.re(0) == doctest::Approx(c.norm() * r.norm()).epsilon(1e-12));
  }
}

TEST_CASE("Riesz representer") {
  auto g = grid24();
  NumericPolicy p;
  const auto f1 = BasicFunctional(g, std::vector<Eigen::RowVectorXcd>(24, Eigen::RowVector2cd(1, 0)), Field::Real);
  const auto c1 = riesz_representer(f1);
  CHECK(c1.real_sample(3) == Eigen::Vector2d(1, 0));

  std::vector<Eigen::RowVectorXcd> rows(24);
  for (std::size_t i = 0; i < 24; ++i) rows[i] = Eigen::RowVector2cd(1.0 / (*g)[i], 0);
  const BasicFunctional f2(g, rows, Field::Real);
  const auto c2 = riesz_representer(f2);
  for (std::size_t i = 0; i < 24; ++i) {
    const double opnorm = Eigen::JacobiSVD<Eigen::MatrixXcd>(Eigen::MatrixXcd(rows[i])).singularValues()(0);
    CHECK(std::abs(rnorm(c2).re(i) - opnorm) <= 1e-12 * opnorm);
    CHECK(rnorm(c2).re(i) == doctest::Approx(1.0 / (*g)[i]));
  }
  const auto c0 = riesz_representer(BasicFunctional(g, std::vector<Eigen::RowVectorXcd>(24, Eigen::RowVectorXcd::Zero(3)), Field::Real));
  CHECK(c0[0].norm() == 0.0);

  std::mt19937_64 rng(8);
  std::vector<Eigen::RowVectorXcd> cr(24);
  for (auto& r : cr) {
    r.resize(3);
    for (int j = 0; j < 3; ++j) r(j) = Complex(oracle::random_vector(rng, 1)(0), oracle::random_vector(rng, 1)(0));
  }
  const BasicFunctional fc(g, cr, Field::Complex);
  const auto cc = riesz_representer(fc);
  const auto v = oracle::random_complex_net(rng, g, 3);
  const auto diff = fc(v) - inner(v, cc);
  CHECK(is_numerically_negligible(abs(diff), p, 10.0));
  for (std::size_t i = 0; i < 24; ++i)
    CHECK(std::abs(cc[i].norm() - Eigen::JacobiSVD<Eigen::MatrixXcd>(Eigen::MatrixXcd(cr[i])).singularValues()(0)) <= 1e-12 * cc[i].norm());
}

TEST_CASE("classification examples") {
  auto g = grid24();
  NumericPolicy p;
  const auto fr = classify_operator(rotation(g), p);
  CHECK(fr.isometric);
  CHECK(fr.unitary);
  CHECK_FALSE(fr.self_adjoint);
  CHECK_FALSE(fr.projection);

  const auto S = IndexSet::where(24, [](std::size_t i) { return i % 2 == 0; });
  const auto P = BasicOperator::from_function(g, [&](std::size_t i, double) {
    return Eigen::Vector2d(S.contains(i) ? 1.0 : 0.0, 1.0).asDiagonal().toDenseMatrix();
  });
  const auto fp = classify_operator(P, p);
  CHECK(fp.projection);
  CHECK(fp.self_adjoint);

  const auto fd = classify_operator(BasicOperator::constant(g, Eigen::Vector2d(2, 1).asDiagonal().toDenseMatrix()), p);
  CHECK(fd.self_adjoint);
  CHECK_FALSE(fd.isometric);
  CHECK_FALSE(fd.unitary);
  CHECK_FALSE(fd.projection);

  CHECK_THROWS_AS(classify_operator(BasicOperator::constant(g, Eigen::MatrixXd::Ones(2, 3)), p), Error);
  Eigen::MatrixXd iso = Eigen::MatrixXd::Zero(3, 2);
  iso(0, 0) = iso(1, 1) = 1;
  CHECK(is_isometric(BasicOperator::constant(g, iso), p));
}

TEST_CASE("kernel is orthogonal to the range of the adjoint") {
  auto g = grid24();
  NumericPolicy p;
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    // Rank-deficient T with known kernel vector n.
    const Eigen::MatrixXd B = oracle::random_matrix(rng, 3, 2);
    const Eigen::MatrixXd T0 = B * oracle::random_matrix(rng, 2, 3);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(T0);
    const Eigen::VectorXd n = lu.kernel().col(0).normalized();
    const auto T = BasicOperator::constant(g, T0);
    const auto u = GenVector::constant(g, n);
    REQUIRE(is_numerically_negligible(rnorm(apply(T, u)), p, 10.0));
    for (int s = 0; s < 20; ++s) {
      const auto v = oracle::random_vector_net(rng, g, 3, 0.0);
      CHECK(is_numerically_negligible(abs(inner(u, apply(adjoint(T), v))), p, 10.0 * (1 + max_abs_component(v))));
    }
  }
}

TEST_CASE("T*T negligible forces T negligible") {
  auto g = grid24();
  NumericPolicy p;
  std::mt19937_64 rng(10);
  std::vector<Eigen::MatrixXd> s(24);
  for (std::size_t i = 0; i < 24; ++i) s[i] = std::pow((*g)[i], 6.0) * oracle::random_matrix(rng, 3, 3);
  const BasicOperator A(g, s);
  const auto AtA = adjoint(A) * A;
  auto entry_max = GenScalar::from_function(g, [&](std::size_t i, double) { return AtA[i].cwiseAbs().maxCoeff(); });
  REQUIRE(is_negligible(entry_max, p));
  const auto n = op_norm_net(A);
  CHECK(is_negligible(n * n, p));
}

TEST_CASE("isometries preserve norms") {
  auto g = grid24();
  NumericPolicy p;
  const auto R = rotation(g);
  REQUIRE(classify_operator(R, p).isometric);
  std::mt19937_64 rng(13);
  for (int t = 0; t < 100; ++t) {
    const auto u = oracle::random_vector_net(rng, g, 2);
    const auto d = rnorm(apply(R, u)) - rnorm(u);
    CHECK(is_numerically_negligible(d, p, 10.0 * (1 + max_abs_component(u))));
  }
}

TEST_CASE("projection flag matches the projection onto the column space") {
  auto g = grid24();
  NumericPolicy p;
  std::mt19937_64 rng(14);
  const Eigen::MatrixXd Q = oracle::random_matrix(rng, 4, 2).householderQr().householderQ() * Eigen::MatrixXd::Identity(4, 2);
  const auto P = BasicOperator::constant(g, Q * Q.transpose());
  REQUIRE(classify_operator(P, p).projection);
  GeneratorSet cols;
  for (int j = 0; j < 4; ++j) cols.gens.push_back(GenVector::constant(g, (Q * Q.transpose()).col(j)));
  const auto B = interleaved_gram_schmidt(cols, p);
  CHECK(B.size() == 2);
  for (int t = 0; t < 50; ++t) {
    const auto v = oracle::random_vector_net(rng, g, 4, 0.0);
    const auto a = apply(P, v), b = project_submodule(B, v, p);
    for (std::size_t i = 0; i < 24; ++i) CHECK((a[i] - b[i]).norm() <= 1e-10 * (1 + v[i].norm()));
  }
}

TEST_CASE("moderate operators") {
  auto g = grid24();
  NumericPolicy p;
  CHECK(BasicOperator::identity(g, 2).is_moderate(p));
  const auto big = BasicOperator::from_function(g, [](std::size_t, double e) { return Eigen::MatrixXd::Constant(1, 1, std::pow(e, -25.0)); });
  CHECK_FALSE(big.is_moderate(p));
}

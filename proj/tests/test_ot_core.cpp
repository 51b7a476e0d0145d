#include "oracles.hpp"
#include "otp/ot_core.hpp"

#include <doctest.h>

#include <random>

using namespace otp;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

CostMatrix cost_of(const Matrix& m) { return CostMatrix{m, m.maxCoeff()}; }

}  // namespace

TEST_CASE("pairwise_sq_dist on hand examples") {
  CHECK(pairwise_sq_dist(mat({{0, 0}}), mat({{0, 0}})).values(0, 0) == 0.0);
  const CostMatrix c = pairwise_sq_dist(mat({{0, 0}}), mat({{3, 4}}));
  CHECK(c.values(0, 0) == 25.0);
  CHECK(c.max_entry == 25.0);
}

TEST_CASE("pairwise_sq_dist matches a naive double loop") {
  std::mt19937_64 rng(11);
  const Matrix a = oracle::random_points(rng, 5, 3);
  const Matrix b = oracle::random_points(rng, 7, 3);
  const CostMatrix c = pairwise_sq_dist(a, b);
  const Matrix ref = oracle::naive_sq_dist(a, b);
  CHECK((c.values - ref).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(c.max_entry == doctest::Approx(ref.maxCoeff()).epsilon(1e-15));
  CHECK((c.values.array() >= 0.0).all());
}

TEST_CASE("pairwise_sq_dist rejects mismatched or empty input") {
  CHECK_THROWS_AS(pairwise_sq_dist(Matrix::Zero(2, 3), Matrix::Zero(2, 2)), ShapeError);
  CHECK_THROWS_AS(pairwise_sq_dist(Matrix::Zero(0, 2), Matrix::Zero(2, 2)), ShapeError);
}

TEST_CASE("pairwise_sq_dist is translation invariant") {
  std::mt19937_64 rng(3);
  const Matrix a = oracle::random_points(rng, 6, 4);
  const Matrix b = oracle::random_points(rng, 9, 4);
  Eigen::RowVectorXd shift(4);
  shift << 3.5, -2.0, 10.0, 0.25;
  const Matrix a2 = a.rowwise() + shift;
  const Matrix b2 = b.rowwise() + shift;
  CHECK((pairwise_sq_dist(a, b).values - pairwise_sq_dist(a2, b2).values).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("marginals validation") {
  Marginals m = Marginals::uniform(3, 4);
  CHECK_NOTHROW(m.validate());
  CHECK(m.a.sum() == doctest::Approx(1.0).epsilon(1e-12));
  m.a[0] = 0.0;
  CHECK_THROWS(m.validate());
  m = Marginals::uniform(2, 2);
  m.b[0] = 0.7;
  CHECK_THROWS(m.validate());
}

TEST_CASE("sinkhorn single mass unit") {
  for (double eps : {1e-3, 0.1, 10.0}) {
    SinkhornOptions opt;
    opt.epsilon = eps;
    const TransportPlan p = sinkhorn(cost_of(mat({{0}})), Marginals::uniform(1, 1), opt);
    CHECK(p.values(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.converged);
  }
}

TEST_CASE("sinkhorn large epsilon approaches the product coupling") {
  // For the symmetric 2x2 problem the plan is known in closed form: the
  // diagonal holds 0.5 / (1 + exp(-1 / eps)). At eps = 100 that is 0.25125,
  // so the product coupling is within 1e-3 only from eps = 125 on.
  SinkhornOptions opt;
  opt.epsilon = 100.0;
  const CostMatrix swap_cost = cost_of(mat({{0, 1}, {1, 0}}));
  const TransportPlan p = sinkhorn(swap_cost, Marginals::uniform(2, 2), opt);
  const double diag = 0.5 / (1.0 + std::exp(-1.0 / 100.0));
  CHECK(std::abs(p.values(0, 0) - diag) <= 1e-12);
  CHECK(std::abs(p.values(0, 1) - (0.5 - diag)) <= 1e-12);
  CHECK(std::abs(p.values(0, 0) - 0.25) <= 1.5e-3);

  opt.epsilon = 1000.0;
  const TransportPlan wide = sinkhorn(swap_cost, Marginals::uniform(2, 2), opt);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(wide.values(i, j) - 0.25) <= 1e-3);
  opt.epsilon = 100.0;

  std::mt19937_64 rng(5);
  const Matrix a = oracle::random_points(rng, 4, 2);
  const Matrix b = oracle::random_points(rng, 6, 2);
  const Marginals m = Marginals::uniform(4, 6);
  const TransportPlan q = sinkhorn(pairwise_sq_dist(a, b), m, opt);
  const Matrix outer = m.a * m.b.transpose();
  CHECK((q.values - outer).cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("sinkhorn small epsilon approaches the permutation plan") {
  SinkhornOptions opt;
  opt.epsilon = 1e-3;
  const CostMatrix c = cost_of(mat({{0, 1}, {1, 0}}));
  const TransportPlan p = sinkhorn(c, Marginals::uniform(2, 2), opt);
  CHECK(std::abs(p.values(0, 0) - 0.5) <= 1e-3);
  CHECK(std::abs(p.values(1, 1) - 0.5) <= 1e-3);
  CHECK(std::abs(p.values(0, 1)) <= 1e-3);
  CHECK(std::abs(p.values(1, 0)) <= 1e-3);
  const ExactAssignment exact = exact_ot_uniform_small(c);
  CHECK(std::abs(entropic_linear_cost(p, c) - exact.cost) <= 1e-2);
}

TEST_CASE("sinkhorn plans are feasible and positive") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = oracle::random_points(rng, 3 + trial % 5, 3);
    const Matrix b = oracle::random_points(rng, 4 + trial % 7, 3);
    const Marginals m = Marginals::uniform(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(b.rows()));
    const TransportPlan p = sinkhorn(pairwise_sq_dist(a, b), m);
    REQUIRE(p.converged);
    CHECK(marginal_violation(p.values, m) <= 1e-9);
    CHECK(p.marginal_violation <= 1e-9);
    CHECK((p.values.array() > 0.0).all());
    CHECK(std::abs(p.values.sum() - 1.0) <= 1e-9);
  }
}

TEST_CASE("sinkhorn respects non-uniform marginals") {
  Marginals m;
  m.a = Eigen::Vector3d(0.2, 0.3, 0.5);
  m.b = Eigen::Vector2d(0.9, 0.1);
  std::mt19937_64 rng(8);
  const TransportPlan p = sinkhorn(pairwise_sq_dist(oracle::random_points(rng, 3, 2), oracle::random_points(rng, 2, 2)), m);
  CHECK(p.converged);
  CHECK(marginal_violation(p.values, m) <= 1e-9);
}

TEST_CASE("sinkhorn symmetry under transposition") {
  std::mt19937_64 rng(13);
  const Matrix a = oracle::random_points(rng, 5, 2);
  const Matrix b = oracle::random_points(rng, 8, 2);
  Marginals m;
  m.a = Eigen::VectorXd::Constant(5, 0.2);
  m.b = Eigen::VectorXd::Constant(8, 0.125);
  Marginals swapped{m.b, m.a};
  SinkhornOptions opt;
  opt.tol = 1e-14;
  const CostMatrix c = pairwise_sq_dist(a, b);
  const CostMatrix ct{c.values.transpose(), c.max_entry};
  const TransportPlan p = sinkhorn(c, m, opt);
  const TransportPlan q = sinkhorn(ct, swapped, opt);
  CHECK((p.values.transpose() - q.values).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("sinkhorn switches to log domain instead of overflowing") {
  // Two far-apart clusters at tiny epsilon: the kernel underflows row-wise.
  Matrix a(3, 1), b(3, 1);
  a << 0.0, 0.1, 10.0;
  b << 10.1, 0.05, 9.9;
  SinkhornOptions opt;
  opt.epsilon = 1e-4;
  opt.max_iter = 5000;
  const Marginals m = Marginals::uniform(3, 3);
  const TransportPlan p = sinkhorn(pairwise_sq_dist(a, b), m, opt);
  CHECK(p.stabilized);
  CHECK(p.values.allFinite());
  CHECK(marginal_violation(p.values, m) <= 1e-6);
}

TEST_CASE("sinkhorn reports non-convergence without throwing") {
  std::mt19937_64 rng(17);
  SinkhornOptions opt;
  opt.epsilon = 1e-3;
  opt.max_iter = 3;
  const TransportPlan p =
      sinkhorn(pairwise_sq_dist(oracle::random_points(rng, 6, 2), oracle::random_points(rng, 6, 2)),
               Marginals::uniform(6, 6), opt);
  CHECK_FALSE(p.converged);
  CHECK(p.iterations == 3);
  CHECK(p.marginal_violation > opt.tol);
}

TEST_CASE("sinkhorn rejects bad parameters") {
  const CostMatrix c = cost_of(mat({{0, 1}, {1, 0}}));
  SinkhornOptions opt;
  opt.epsilon = 0.0;
  CHECK_THROWS(sinkhorn(c, Marginals::uniform(2, 2), opt));
  opt = {};
  opt.tol = -1.0;
  CHECK_THROWS(sinkhorn(c, Marginals::uniform(2, 2), opt));
  CHECK_THROWS_AS(sinkhorn(c, Marginals::uniform(3, 2)), ShapeError);
}

TEST_CASE("exact_ot_uniform_small") {
  const ExactAssignment id = exact_ot_uniform_small(mat({{0, 1}, {1, 0}}));
  CHECK(id.cost == 0.0);
  CHECK(id.assignment == std::vector<std::size_t>{0, 1});
  const ExactAssignment one = exact_ot_uniform_small(mat({{5}}));
  CHECK(one.cost == 5.0);
  CHECK(one.assignment == std::vector<std::size_t>{0});
  CHECK_THROWS(exact_ot_uniform_small(Matrix::Zero(9, 9)));
  CHECK_THROWS_AS(exact_ot_uniform_small(Matrix::Zero(2, 3)), ShapeError);

  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> digit(0, 9);
  for (int trial = 0; trial < 25; ++trial) {
    Matrix m(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(i, j) = digit(rng);
    const ExactAssignment e = exact_ot_uniform_small(m);
    CHECK(e.cost == doctest::Approx(oracle::heap_min_assignment(m)).epsilon(1e-15));
    double check = 0.0;
    for (int i = 0; i < 4; ++i) check += m(i, static_cast<Eigen::Index>(e.assignment[static_cast<std::size_t>(i)]));
    CHECK(check / 4.0 == doctest::Approx(e.cost));
  }
}

TEST_CASE("entropic linear cost") {
  CHECK(entropic_linear_cost(mat({{1}}), mat({{0}})) == 0.0);
  CHECK(entropic_linear_cost(mat({{0.5, 0}, {0, 0.5}}), mat({{0, 1}, {1, 0}})) == 0.0);
  CHECK_THROWS_AS(entropic_linear_cost(Matrix::Zero(2, 2), Matrix::Zero(2, 3)), ShapeError);

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const CostMatrix c = pairwise_sq_dist(oracle::random_points(rng, 3, 2), oracle::random_points(rng, 3, 2));
    const TransportPlan p = sinkhorn(c, Marginals::uniform(3, 3));
    CHECK(entropic_linear_cost(p, c) >= oracle::heap_min_assignment(c.values) - 1e-12);
  }
}

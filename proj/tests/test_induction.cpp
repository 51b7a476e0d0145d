#include "oracles.hpp"
#include "otp/induction.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace otp;

namespace {

InductionModel model_of(const Matrix& anchors, std::vector<int> labels, int k, double scale) {
  InductionModel m;
  m.anchors = anchors;
  m.labels = std::move(labels);
  m.num_classes = k;
  m.kernel_scale = scale;
  return m;
}

std::span<const double> as_span(const Eigen::RowVectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

TEST_CASE("induction_weights") {
  Matrix anchors(3, 2);
  anchors << 0, 0, 1, 0, 0, 1;
  const InductionModel m = model_of(anchors, {0, 1, 1}, 2, 0.5);

  Eigen::RowVectorXd at_first(2);
  at_first << 0, 0;
  const Vector w = induction_weights(as_span(at_first), m);
  CHECK(w[0] == 1.0);
  CHECK(w.maxCoeff() == w[0]);

  Eigen::RowVectorXd centre(2);
  centre << 0, 0;
  Matrix ring(4, 2);
  ring << 1, 0, -1, 0, 0, 1, 0, -1;
  const Vector eq = induction_weights(as_span(centre), model_of(ring, {0, 0, 1, 1}, 2, 0.7));
  CHECK((eq.array() == eq[0]).all());

  Eigen::RowVectorXd wrong(3);
  wrong << 0, 0, 0;
  CHECK_THROWS_AS(induction_weights(as_span(wrong), m), ShapeError);
}

TEST_CASE("induction_weights match the kernel formula entrywise") {
  std::mt19937_64 rng(31);
  const Matrix anchors = oracle::random_points(rng, 10, 3);
  const Matrix probe = oracle::random_points(rng, 1, 3);
  const InductionModel m = model_of(anchors, {0, 1, 0, 1, 0, 1, 0, 1, 0, 1}, 2, 1.7);
  const Eigen::RowVectorXd x = probe.row(0);
  const Vector w = induction_weights(as_span(x), m);
  for (int i = 0; i < 10; ++i) {
    double d2 = 0.0;
    for (int f = 0; f < 3; ++f) d2 += (anchors(i, f) - x[f]) * (anchors(i, f) - x[f]);
    CHECK(std::abs(w[i] - std::exp(-d2 / 1.7)) <= 1e-12);
    CHECK(w[i] > 0.0);
  }
}

TEST_CASE("induce_label") {
  Matrix single(1, 2);
  single << 3, 3;
  Eigen::RowVectorXd x(2);
  x << -5, 8;
  CHECK(induce_label(as_span(x), model_of(single, {0}, 1, 1.0)) == 0);

  Matrix anchors(4, 2);
  anchors << 0, 0, 0.1, 0, 0, 0.1, 20, 20;
  Eigen::RowVectorXd at(2);
  at << 20, 20;
  CHECK(induce_label(as_span(at), model_of(anchors, {0, 0, 0, 1}, 2, 1.0)) == 1);

  // Far from every anchor the raw weights underflow; the vote still follows
  // the nearest anchors.
  Eigen::RowVectorXd far(2);
  far << 1e4, 1e4;
  CHECK(induce_label(as_span(far), model_of(anchors, {0, 0, 0, 1}, 2, 1.0)) == 1);
}

TEST_CASE("induce_label matches explicit class-sum enumeration") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix anchors = oracle::random_points(rng, 6, 2);
    std::vector<int> labels{0, 1, 0, 1, 1, 0};
    std::shuffle(labels.begin(), labels.end(), rng);
    const InductionModel m = model_of(anchors, labels, 2, 0.8);
    const Eigen::RowVectorXd x = oracle::random_points(rng, 1, 2).row(0);
    double sum0 = 0.0, sum1 = 0.0;
    for (int i = 0; i < 6; ++i) {
      const double w = std::exp(-(anchors.row(i) - x).squaredNorm() / 0.8);
      (labels[static_cast<std::size_t>(i)] == 0 ? sum0 : sum1) += w;
    }
    CHECK(induce_label(as_span(x), m) == (sum1 > sum0 ? 1 : 0));
  }
}

TEST_CASE("weighted_vote tie rule and validation") {
  const std::vector<int> labels{1, 0};
  CHECK(weighted_vote(Eigen::Vector2d(0.5, 0.5), labels, 2) == 0);
  CHECK(weighted_vote(Eigen::Vector2d(0.6, 0.4), labels, 2) == 1);
  CHECK_THROWS(weighted_vote(Eigen::Vector2d(0.6, 0.4), labels, 1));
  CHECK_THROWS_AS(weighted_vote(Eigen::Vector3d(0.6, 0.4, 0.1), labels, 2), ShapeError);
}

TEST_CASE("induce_value") {
  Matrix anchors(3, 1);
  anchors << 0, 1, 2;
  Eigen::RowVectorXd x(1);
  x << 0.3;
  const SignedValue all_plus = induce_value(as_span(x), model_of(anchors, {0, 0, 0}, 2, 1.0));
  CHECK(all_plus.value == 1.0);
  CHECK(all_plus.sign == 1);

  Matrix pair(2, 1);
  pair << -1, 1;
  Eigen::RowVectorXd mid(1);
  mid << 0;
  const SignedValue tie = induce_value(as_span(mid), model_of(pair, {0, 1}, 2, 1.0));
  CHECK(tie.value == 0.0);
  CHECK(tie.sign == 1);

  CHECK_THROWS(induce_value(as_span(x), model_of(anchors, {0, 1, 2}, 3, 1.0)));
}

TEST_CASE("binary vote and signed value agree; outputs are scale invariant") {
  std::mt19937_64 rng(123);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix anchors = oracle::random_points(rng, 8, 2);
    std::vector<int> labels(8);
    for (int& y : labels) y = coin(rng) ? 1 : 0;
    labels[0] = 0;
    labels[1] = 1;
    const Eigen::RowVectorXd x = oracle::random_points(rng, 1, 2).row(0);
    const InductionModel m = model_of(anchors, labels, 2, 0.5);
    const SignedValue v = induce_value(as_span(x), m);
    CHECK(v.value >= -1.0);
    CHECK(v.value <= 1.0);
    CHECK(induce_label(as_span(x), m) == (v.sign > 0 ? 0 : 1));

    // Rescaling the weights by a constant leaves the vote unchanged.
    const Vector w = induction_weights(as_span(x), m);
    CHECK(weighted_vote(w * 1e-7, labels, 2) == weighted_vote(w, labels, 2));
    CHECK(weighted_vote(w * 3.0e5, labels, 2) == induce_label(as_span(x), m));
  }
}

TEST_CASE("model save and load keep anchors exactly") {
  std::mt19937_64 rng(2);
  const InductionModel m = model_of(oracle::random_points(rng, 5, 3), {0, 2, 1, 0, 2}, 3, 0.123456789);
  const std::vector<std::string> names{"setosa", "versicolor", "virginica"};
  std::stringstream buf;
  save_model(buf, m, names);
  const LoadedModel back = load_model(buf);
  CHECK(back.class_names == names);
  CHECK(back.model.labels == m.labels);
  CHECK(back.model.num_classes == 3);
  CHECK(back.model.kernel_scale == m.kernel_scale);
  CHECK(back.model.anchors == m.anchors);

  std::stringstream bad("kernel_scale,1\nclasses,a,b\nf0,label\n0.5,7\n");
  CHECK_THROWS(load_model(bad));
  std::stringstream garbage("hello\n");
  CHECK_THROWS(load_model(garbage));
}

TEST_CASE("model validation") {
  Matrix a(2, 1);
  a << 0, 1;
  CHECK_THROWS(model_of(a, {0, 1}, 2, 0.0).validate());
  CHECK_THROWS(model_of(a, {0}, 2, 1.0).validate());
  CHECK_THROWS(model_of(a, {0, 3}, 2, 1.0).validate());
  CHECK_NOTHROW(model_of(a, {0, 1}, 2, 1.0).validate());
}

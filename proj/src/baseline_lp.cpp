#include "otp/baseline_lp.hpp"

#include <cmath>
#include <string>

namespace otp {

GaussianAffinity gaussian_affinity(const Matrix& points, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_affinity: sigma must be positive");
  const Eigen::Index n = points.rows();
  GaussianAffinity out;
  out.sigma = sigma;
  out.values.resize(n, n);
  const double denom = 2.0 * sigma * sigma;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d2 = (points.row(i) - points.row(j)).squaredNorm();
      const double w = std::exp(-d2 / denom);
      out.values(i, j) = w;
      out.values(j, i) = w;
    }
  }
  return out;
}

LpResult lp_propagate(const GaussianAffinity& affinity, std::span<const int> labels, int num_classes,
                      const LpOptions& options) {
  const Eigen::Index n = affinity.values.rows();
  const auto l = static_cast<Eigen::Index>(labels.size());
  if (affinity.values.cols() != n) throw ShapeError("lp_propagate: affinity must be square");
  if (l == 0 || l > n) throw ShapeError("lp_propagate: labeled count must be in [1, n]");
  if (num_classes < 1) throw std::invalid_argument("lp_propagate: num_classes must be positive");
  std::vector<bool> seen(static_cast<std::size_t>(num_classes), false);
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw std::invalid_argument("lp_propagate: label out of range");
    seen[static_cast<std::size_t>(y)] = true;
  }
  for (int k = 0; k < num_classes; ++k) {
    if (!seen[static_cast<std::size_t>(k)]) {
      throw std::invalid_argument("lp_propagate: class " + std::to_string(k) + " has no labeled point");
    }
  }

  // Row-stochastic transition matrix; the unit diagonal keeps every row sum positive.
  const Vector degree = affinity.values.rowwise().sum();
  const Matrix transition = degree.cwiseInverse().asDiagonal() * affinity.values;

  Matrix clamp = Matrix::Zero(l, num_classes);
  for (Eigen::Index i = 0; i < l; ++i) clamp(i, labels[static_cast<std::size_t>(i)]) = 1.0;
  Matrix f = Matrix::Zero(n, num_classes);
  f.topRows(l) = clamp;

  LpResult out;
  while (out.iterations < options.max_iter) {
    ++out.iterations;
    Matrix next = transition * f;
    next.topRows(l) = clamp;
    out.final_change = (next - f).cwiseAbs().maxCoeff();
    f = std::move(next);
    if (out.final_change <= options.tol) {
      out.converged = true;
      break;
    }
  }

  out.labels.resize(static_cast<std::size_t>(n - l));
  for (Eigen::Index j = l; j < n; ++j) {
    Eigen::Index best = 0;
    f.row(j).maxCoeff(&best);
    out.labels[static_cast<std::size_t>(j - l)] = static_cast<int>(best);
  }
  return out;
}

}  // namespace otp

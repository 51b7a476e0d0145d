#pragma once

#include "otp/common.hpp"

#include <span>
#include <vector>

namespace otp {

/// Dense Gaussian similarity w_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)).
struct GaussianAffinity {
  Matrix values;
  double sigma = 1.0;
};

GaussianAffinity gaussian_affinity(const Matrix& points, double sigma);

struct LpOptions {
  double tol = 1e-6;
  int max_iter = 1000;
};

struct LpResult {
  std::vector<int> labels;  // one per unlabeled index (rows l..n-1)
  int iterations = 0;
  double final_change = 0.0;
  bool converged = false;
};

/// Clamped label propagation. The first `labels.size()` rows of the affinity
/// are the labeled points. Iterates F <- D^-1 W F, resetting labeled rows to
/// their one-hot encoding after each step, until the largest change in F is
/// at most `tol`. Unlabeled rows take the argmax class, ties to the lowest index.
LpResult lp_propagate(const GaussianAffinity& affinity, std::span<const int> labels, int num_classes,
                      const LpOptions& options = {});

}  // namespace otp

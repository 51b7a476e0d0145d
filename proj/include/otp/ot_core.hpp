#pragma once

#include "otp/common.hpp"

#include <cstddef>
#include <vector>

namespace otp {

/// Pairwise squared Euclidean distances between a source and a target set.
struct CostMatrix {
  Matrix values;
  // Largest entry; Sinkhorn divides by it so that epsilon is scale-free.
  double max_entry = 0.0;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
};

/// Source weights `a` and target weights `b`, both probability vectors.
struct Marginals {
  Vector a;
  Vector b;

  static Marginals uniform(std::size_t sources, std::size_t targets);

  /// Throws std::invalid_argument unless both vectors are strictly positive
  /// and sum to 1 within 1e-12.
  void validate() const;
};

struct SinkhornOptions {
  double epsilon = 0.1;  // relative to the largest cost entry
  double tol = 1e-9;     // on the max-norm marginal violation
  int max_iter = 10000;
  int check_every = 10;
};

struct TransportPlan {
  Matrix values;
  double epsilon = 0.0;
  int iterations = 0;
  double marginal_violation = 0.0;
  bool converged = false;
  // True once the solver left the scaling form for log-domain iterations.
  bool stabilized = false;
};

CostMatrix pairwise_sq_dist(const Matrix& source, const Matrix& target);

/// Entropy-regularized OT between the marginals under `cost`.
///
/// Runs Sinkhorn-Knopp scaling on the Gibbs kernel exp(-M / (eps * max_entry)).
/// If a scaling vector leaves [1e-100, 1e100] or stops being finite, the
/// iteration continues on dual potentials with log-sum-exp updates from the
/// last healthy scalings. Non-convergence is reported through
/// `TransportPlan::converged` rather than an exception.
TransportPlan sinkhorn(const CostMatrix& cost, const Marginals& marginals,
                       const SinkhornOptions& options = {});

/// Max-norm deviation of the plan's row and column sums from the marginals.
double marginal_violation(const Matrix& plan, const Marginals& marginals);

struct ExactAssignment {
  double cost = 0.0;
  std::vector<std::size_t> assignment;  // source i is sent to assignment[i]
};

/// Exact OT for uniform square problems by enumerating all permutations.
/// Intended as a test oracle; rejects n > 8.
ExactAssignment exact_ot_uniform_small(const Matrix& cost);
inline ExactAssignment exact_ot_uniform_small(const CostMatrix& cost) {
  return exact_ot_uniform_small(cost.values);
}

/// Frobenius inner product <plan, cost> on the unnormalized cost.
double entropic_linear_cost(const Matrix& plan, const Matrix& cost);
inline double entropic_linear_cost(const TransportPlan& plan, const CostMatrix& cost) {
  return entropic_linear_cost(plan.values, cost.values);
}

}  // namespace otp

#pragma once

#include "otp/common.hpp"
#include "otp/ot_core.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace otp {

/// Column-stochastic l x u matrix obtained from a transport plan.
struct AffinityMatrix {
  Matrix values;
  // Columns whose mass underflowed and were replaced by the uniform column.
  std::vector<std::size_t> degenerate_columns;
};

/// Row-stochastic u x K matrix of class probabilities. Class k is the k-th
/// entry of `class_ids`; by default classes are the dense indices 0..K-1.
struct ClassProbabilityMatrix {
  Matrix values;
  std::vector<int> class_ids;

  int num_classes() const { return static_cast<int>(values.cols()); }
};

struct CertaintyVector {
  Vector scores;
};

/// A point from the unlabeled set selected for labeling.
struct LabelAssignment {
  std::size_t index;  // row in the class-probability matrix
  int label;          // class index
  double certainty;
};

enum class Threshold {
  kStrict,     // s > alpha
  kInclusive,  // s >= alpha, used on relaxed iterations
};

AffinityMatrix column_normalize(const Matrix& plan);
inline AffinityMatrix column_normalize(const TransportPlan& plan) {
  return column_normalize(plan.values);
}

/// Sums affinity mass per class: u_{j,k} = sum over labeled i of class k of p_{i,j}.
/// `labels` are class indices in [0, num_classes); every class must occur.
ClassProbabilityMatrix class_probability_matrix(const AffinityMatrix& affinity,
                                                std::span<const int> labels, int num_classes);

/// s_j = 1 - H(U_j) / log2(K), with 0 log 0 = 0. For K = 1 every score is 1.
CertaintyVector certainty_scores(const ClassProbabilityMatrix& probabilities);

/// Shannon entropy in bits of one probability row.
double entropy_bits(std::span<const double> row);

/// Points whose certainty passes `alpha`, labeled by their most probable
/// class (ties to the lowest class index). Returned in ascending row order.
std::vector<LabelAssignment> assign_labels(const ClassProbabilityMatrix& probabilities,
                                           const CertaintyVector& certainty, double alpha,
                                           Threshold threshold = Threshold::kStrict);

/// Lowered threshold after a stall: alpha - min_j (alpha - s_j), which is the
/// largest remaining score. Rejects an empty score vector and a vector that
/// has a score above alpha (no stall).
double relax_alpha(double alpha, const CertaintyVector& certainty);

struct PropagationConfig {
  double epsilon = 0.1;  // relative entropic regularization
  double alpha = 0.8;    // certainty threshold
  double tol = 1e-9;     // Sinkhorn marginal tolerance
  int max_iter = 10000;  // Sinkhorn iteration cap
};

struct IterationRecord {
  int t = 0;
  std::size_t labeled = 0;    // m_t
  std::size_t unlabeled = 0;  // n_t
  std::size_t newly_labeled = 0;  // zeta_t
  double alpha_used = 0.0;
  bool relaxed = false;
  int sinkhorn_iterations = 0;
  bool sinkhorn_converged = true;
};

struct PointRecord {
  int iteration = 0;
  double certainty = 0.0;
  int label = -1;
};

struct PropagationTrace {
  std::size_t initial_labeled = 0;    // m_0 = l
  std::size_t initial_unlabeled = 0;  // n_0 = u
  std::vector<IterationRecord> iterations;
  std::vector<PointRecord> points;  // indexed like the unlabeled input
  std::vector<std::string> warnings;
};

struct PropagationResult {
  std::vector<int> labels;  // one per unlabeled input point
  PropagationTrace trace;
  // epsilon times the largest entry of the last cost matrix, i.e. the
  // absolute temperature of the last Gibbs kernel.
  double kernel_scale = 0.0;
};

/// Transductive labeling of `unlabeled` from `labeled` by optimal transport
/// propagation. Each round solves entropic OT between the current labeled and
/// unlabeled sets under uniform weights, scores every unlabeled point from the
/// round-start class probabilities, and moves all points scoring above alpha
/// into the labeled set. A round with no such point lowers alpha to the best
/// score for that round only. Terminates when every point is labeled.
PropagationResult propagate(const Matrix& labeled, std::span<const int> labels,
                            const Matrix& unlabeled, int num_classes,
                            const PropagationConfig& config = {});

/// One line per iteration: `t,m_t,n_t,zeta_t,alpha_used,relaxed`, with header.
void write_trace_csv(std::ostream& out, const PropagationTrace& trace);

}  // namespace otp

#include "otp/propagation.hpp"

#include "number_format.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace otp {

namespace {

constexpr double kDegenerateColumn = 1e-300;

Matrix gather_rows(const Matrix& source, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), source.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = source.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

void check_labels(std::span<const int> labels, int num_classes) {
  if (num_classes < 1) throw std::invalid_argument("num_classes must be at least 1");
  std::vector<bool> seen(static_cast<std::size_t>(num_classes), false);
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw std::invalid_argument("label " + std::to_string(y) + " outside [0, " +
                                  std::to_string(num_classes) + ")");
    }
    seen[static_cast<std::size_t>(y)] = true;
  }
  for (int k = 0; k < num_classes; ++k) {
    if (!seen[static_cast<std::size_t>(k)]) {
      throw std::invalid_argument("class " + std::to_string(k) + " has no labeled representative");
    }
  }
}

}  // namespace

AffinityMatrix column_normalize(const Matrix& plan) {
  if (plan.rows() == 0 || plan.cols() == 0) throw ShapeError("column_normalize: empty plan");
  AffinityMatrix out;
  out.values.resize(plan.rows(), plan.cols());
  const double uniform = 1.0 / static_cast<double>(plan.rows());
  for (Eigen::Index j = 0; j < plan.cols(); ++j) {
    const double total = plan.col(j).sum();
    if (!(total >= kDegenerateColumn)) {
      out.values.col(j).setConstant(uniform);
      out.degenerate_columns.push_back(static_cast<std::size_t>(j));
      continue;
    }
    out.values.col(j) = plan.col(j) / total;
  }
  return out;
}

ClassProbabilityMatrix class_probability_matrix(const AffinityMatrix& affinity,
                                                std::span<const int> labels, int num_classes) {
  if (static_cast<Eigen::Index>(labels.size()) != affinity.values.rows()) {
    throw ShapeError("class_probability_matrix: one label per affinity row required");
  }
  check_labels(labels, num_classes);

  ClassProbabilityMatrix out;
  out.values = Matrix::Zero(affinity.values.cols(), num_classes);
  out.class_ids.resize(static_cast<std::size_t>(num_classes));
  for (int k = 0; k < num_classes; ++k) out.class_ids[static_cast<std::size_t>(k)] = k;
  for (Eigen::Index i = 0; i < affinity.values.rows(); ++i) {
    const int k = labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < affinity.values.cols(); ++j) {
      out.values(j, k) += affinity.values(i, j);
    }
  }
  return out;
}

double entropy_bits(std::span<const double> row) {
  double h = 0.0;
  for (double p : row) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

CertaintyVector certainty_scores(const ClassProbabilityMatrix& probabilities) {
  const Eigen::Index rows = probabilities.values.rows();
  const int k = probabilities.num_classes();
  if (k < 1) throw std::invalid_argument("certainty_scores: need at least one class");
  CertaintyVector out;
  out.scores.resize(rows);
  if (k == 1) {
    out.scores.setOnes();
    return out;
  }
  const double max_entropy = std::log2(static_cast<double>(k));
  for (Eigen::Index j = 0; j < rows; ++j) {
    const auto row = probabilities.values.row(j);
    const double h = entropy_bits(std::span<const double>(row.data(), static_cast<std::size_t>(k)));
    out.scores[j] = std::clamp(1.0 - h / max_entropy, 0.0, 1.0);
  }
  return out;
}

std::vector<LabelAssignment> assign_labels(const ClassProbabilityMatrix& probabilities,
                                           const CertaintyVector& certainty, double alpha,
                                           Threshold threshold) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("assign_labels: alpha must lie in [0, 1]");
  if (certainty.scores.size() != probabilities.values.rows()) {
    throw ShapeError("assign_labels: one score per probability row required");
  }
  std::vector<LabelAssignment> out;
  for (Eigen::Index j = 0; j < probabilities.values.rows(); ++j) {
    const double s = certainty.scores[j];
    const bool passes = threshold == Threshold::kStrict ? s > alpha : s >= alpha;
    if (!passes) continue;
    Eigen::Index best = 0;
    probabilities.values.row(j).maxCoeff(&best);  // first maximum wins
    out.push_back({static_cast<std::size_t>(j), static_cast<int>(best), s});
  }
  return out;
}

double relax_alpha(double alpha, const CertaintyVector& certainty) {
  if (certainty.scores.size() == 0) throw std::invalid_argument("relax_alpha: no unlabeled points");
  const double best = certainty.scores.maxCoeff();
  if (best > alpha) throw std::invalid_argument("relax_alpha: a score already exceeds alpha");
  // alpha - min_j (alpha - s_j) reduces to the largest score; returning it
  // directly keeps the tie exact.
  return best;
}

PropagationResult propagate(const Matrix& labeled, std::span<const int> labels,
                            const Matrix& unlabeled, int num_classes,
                            const PropagationConfig& config) {
  if (static_cast<Eigen::Index>(labels.size()) != labeled.rows()) {
    throw ShapeError("propagate: one label per labeled point required");
  }
  if (labeled.rows() == 0) throw std::invalid_argument("propagate: labeled set is empty");
  if (unlabeled.rows() == 0) throw std::invalid_argument("propagate: unlabeled set is empty");
  if (labeled.cols() != unlabeled.cols()) throw ShapeError("propagate: feature dimensions differ");
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) {
    throw std::invalid_argument("propagate: alpha must lie in [0, 1]");
  }
  check_labels(labels, num_classes);

  const std::size_t l = static_cast<std::size_t>(labeled.rows());
  const std::size_t u = static_cast<std::size_t>(unlabeled.rows());

  // Pool of every point: labeled first, then unlabeled.
  Matrix pool(labeled.rows() + unlabeled.rows(), labeled.cols());
  pool.topRows(labeled.rows()) = labeled;
  pool.bottomRows(unlabeled.rows()) = unlabeled;

  std::vector<std::size_t> labeled_rows(l);
  std::vector<int> labeled_classes(labels.begin(), labels.end());
  for (std::size_t i = 0; i < l; ++i) labeled_rows[i] = i;
  std::vector<std::size_t> remaining(u);  // indices into `unlabeled`
  for (std::size_t j = 0; j < u; ++j) remaining[j] = j;

  PropagationResult result;
  result.labels.assign(u, -1);
  PropagationTrace& trace = result.trace;
  trace.initial_labeled = l;
  trace.initial_unlabeled = u;
  trace.points.resize(u);

  SinkhornOptions ot;
  ot.epsilon = config.epsilon;
  ot.tol = config.tol;
  ot.max_iter = config.max_iter;

  int t = 0;
  while (!remaining.empty()) {
    ++t;
    std::vector<std::size_t> target_rows(remaining.size());
    for (std::size_t j = 0; j < remaining.size(); ++j) target_rows[j] = l + remaining[j];

    const CostMatrix cost = pairwise_sq_dist(gather_rows(pool, labeled_rows), gather_rows(pool, target_rows));
    const TransportPlan plan =
        sinkhorn(cost, Marginals::uniform(labeled_rows.size(), remaining.size()), ot);
    const AffinityMatrix affinity = column_normalize(plan);
    const ClassProbabilityMatrix probs = class_probability_matrix(affinity, labeled_classes, num_classes);
    const CertaintyVector scores = certainty_scores(probs);

    result.kernel_scale = config.epsilon * (cost.max_entry > 0.0 ? cost.max_entry : 1.0);
    if (!plan.converged) {
      trace.warnings.push_back("iteration " + std::to_string(t) +
                               ": sinkhorn stopped at max_iter with marginal violation " +
                               detail::format_number(plan.marginal_violation));
    }
    if (!affinity.degenerate_columns.empty()) {
      trace.warnings.push_back("iteration " + std::to_string(t) + ": " +
                               std::to_string(affinity.degenerate_columns.size()) +
                               " degenerate affinity column(s) replaced by uniform");
    }

    IterationRecord rec;
    rec.t = t;
    rec.alpha_used = config.alpha;
    rec.sinkhorn_iterations = plan.iterations;
    rec.sinkhorn_converged = plan.converged;

    std::vector<LabelAssignment> batch = assign_labels(probs, scores, config.alpha, Threshold::kStrict);
    if (batch.empty()) {
      rec.alpha_used = relax_alpha(config.alpha, scores);
      rec.relaxed = true;
      batch = assign_labels(probs, scores, rec.alpha_used, Threshold::kInclusive);
    }

    std::vector<bool> taken(remaining.size(), false);
    for (const LabelAssignment& a : batch) {
      const std::size_t original = remaining[a.index];
      result.labels[original] = a.label;
      trace.points[original] = {t, a.certainty, a.label};
      labeled_rows.push_back(l + original);
      labeled_classes.push_back(a.label);
      taken[a.index] = true;
    }
    std::vector<std::size_t> still;
    still.reserve(remaining.size() - batch.size());
    for (std::size_t j = 0; j < remaining.size(); ++j) {
      if (!taken[j]) still.push_back(remaining[j]);
    }
    remaining = std::move(still);

    rec.newly_labeled = batch.size();
    rec.labeled = labeled_rows.size();
    rec.unlabeled = remaining.size();
    trace.iterations.push_back(rec);
  }
  return result;
}

void write_trace_csv(std::ostream& out, const PropagationTrace& trace) {
  out << "t,m_t,n_t,zeta_t,alpha_used,relaxed\n";
  for (const IterationRecord& r : trace.iterations) {
    out << r.t << ',' << r.labeled << ',' << r.unlabeled << ',' << r.newly_labeled << ','
        << detail::format_number(r.alpha_used) << ',' << (r.relaxed ? 1 : 0) << '\n';
  }
}

}  // namespace otp

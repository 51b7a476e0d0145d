#include "otp/ot_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace otp {

namespace {

constexpr double kScalingCeiling = 1e100;
constexpr double kScalingFloor = 1e-100;
// Plain iterations hand over to the annealed log-domain solver when the
// violation fails to halve over this many iterations.
constexpr int kStallWindow = 100;

bool scalings_healthy(const Vector& s) {
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double x = s[i];
    if (!std::isfinite(x) || x > kScalingCeiling || x < kScalingFloor) return false;
  }
  return true;
}

void check_probability_vector(const Vector& w, const char* name) {
  if (w.size() == 0) throw std::invalid_argument(std::string("marginal ") + name + " is empty");
  double total = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0)) {
      throw std::invalid_argument(std::string("marginal ") + name + " has a non-positive entry");
    }
    total += w[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument(std::string("marginal ") + name + " does not sum to 1");
  }
}

// Log-domain Sinkhorn on the normalized cost. Potentials f, g are in the
// units of the normalized cost; the plan is exp((f_i + g_j - C_ij) / eps).
struct LogState {
  Vector f;
  Vector g;
};

Matrix plan_from_potentials(const Matrix& cost, const LogState& s, double eps) {
  Matrix plan(cost.rows(), cost.cols());
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    for (Eigen::Index j = 0; j < cost.cols(); ++j) {
      plan(i, j) = std::exp((s.f[i] + s.g[j] - cost(i, j)) / eps);
    }
  }
  return plan;
}

// Iterates at temperature `eps` until the violation drops to `tol` or the
// iteration budget `limit` is spent. Returns the last measured violation.
double log_sinkhorn_stage(const Matrix& cost, const Vector& log_a, const Vector& log_b, double eps,
                          double tol, int limit, int check_every, const Marginals& m, LogState& state,
                          int& iterations) {
  const Eigen::Index rows = cost.rows();
  const Eigen::Index cols = cost.cols();
  std::vector<double> buf(static_cast<std::size_t>(std::max(rows, cols)));
  double violation = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= limit; ++it) {
    ++iterations;
    for (Eigen::Index i = 0; i < rows; ++i) {
      double hi = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < cols; ++j) {
        buf[j] = (state.g[j] - cost(i, j)) / eps;
        hi = std::max(hi, buf[j]);
      }
      double acc = 0.0;
      for (Eigen::Index j = 0; j < cols; ++j) acc += std::exp(buf[j] - hi);
      state.f[i] = eps * (log_a[i] - hi - std::log(acc));
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      double hi = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows; ++i) {
        buf[i] = (state.f[i] - cost(i, j)) / eps;
        hi = std::max(hi, buf[i]);
      }
      double acc = 0.0;
      for (Eigen::Index i = 0; i < rows; ++i) acc += std::exp(buf[i] - hi);
      state.g[j] = eps * (log_b[j] - hi - std::log(acc));
    }
    if (it % check_every == 0 || it == limit) {
      violation = marginal_violation(plan_from_potentials(cost, state, eps), m);
      if (violation <= tol) break;
    }
  }
  return violation;
}

// Log-domain iterations with epsilon annealing: coarse stages at 2^k * eps
// (starting at or below 1) warm-start the potentials for the target
// temperature, which otherwise needs on the order of range/eps iterations.
void log_sinkhorn(const Matrix& cost, const Marginals& m, const SinkhornOptions& opt, LogState& state,
                  TransportPlan& out) {
  const Vector log_a = m.a.array().log();
  const Vector log_b = m.b.array().log();
  constexpr double kStageTol = 1e-4;
  constexpr int kStageCap = 200;

  std::vector<double> stages;
  for (double e = opt.epsilon * 2.0; e < 1.0; e *= 2.0) stages.push_back(e);
  std::reverse(stages.begin(), stages.end());
  for (double e : stages) {
    const int budget = std::min(kStageCap, opt.max_iter - out.iterations - 1);
    if (budget <= 0) break;
    log_sinkhorn_stage(cost, log_a, log_b, e, std::max(kStageTol, opt.tol), budget, opt.check_every, m, state,
                       out.iterations);
  }
  const int remaining = std::max(1, opt.max_iter - out.iterations);
  const double violation = log_sinkhorn_stage(cost, log_a, log_b, opt.epsilon, opt.tol, remaining,
                                              opt.check_every, m, state, out.iterations);
  out.converged = violation <= opt.tol;
  out.values = plan_from_potentials(cost, state, opt.epsilon);
  out.marginal_violation = marginal_violation(out.values, m);
}

}  // namespace

Marginals Marginals::uniform(std::size_t sources, std::size_t targets) {
  if (sources == 0 || targets == 0) throw std::invalid_argument("uniform marginals need nonempty sets");
  Marginals m;
  m.a = Vector::Constant(static_cast<Eigen::Index>(sources), 1.0 / static_cast<double>(sources));
  m.b = Vector::Constant(static_cast<Eigen::Index>(targets), 1.0 / static_cast<double>(targets));
  return m;
}

void Marginals::validate() const {
  check_probability_vector(a, "a");
  check_probability_vector(b, "b");
}

CostMatrix pairwise_sq_dist(const Matrix& source, const Matrix& target) {
  if (source.rows() == 0 || target.rows() == 0) {
    throw ShapeError("pairwise_sq_dist: point sets must be nonempty");
  }
  if (source.cols() != target.cols()) {
    throw ShapeError("pairwise_sq_dist: dimension mismatch (" + std::to_string(source.cols()) +
                     " vs " + std::to_string(target.cols()) + ")");
  }
  CostMatrix cost;
  cost.values.resize(source.rows(), target.rows());
  double hi = 0.0;
  for (Eigen::Index i = 0; i < source.rows(); ++i) {
    for (Eigen::Index j = 0; j < target.rows(); ++j) {
      double acc = 0.0;
      for (Eigen::Index f = 0; f < source.cols(); ++f) {
        const double diff = source(i, f) - target(j, f);
        acc += diff * diff;
      }
      cost.values(i, j) = acc;
      hi = std::max(hi, acc);
    }
  }
  cost.max_entry = hi;
  return cost;
}

double marginal_violation(const Matrix& plan, const Marginals& marginals) {
  const Vector rows = plan.rowwise().sum();
  const Vector cols = plan.colwise().sum().transpose();
  return std::max((rows - marginals.a).cwiseAbs().maxCoeff(),
                  (cols - marginals.b).cwiseAbs().maxCoeff());
}

TransportPlan sinkhorn(const CostMatrix& cost, const Marginals& marginals,
                       const SinkhornOptions& options) {
  if (!(options.epsilon > 0.0)) throw std::invalid_argument("sinkhorn: epsilon must be positive");
  if (!(options.tol > 0.0)) throw std::invalid_argument("sinkhorn: tol must be positive");
  if (options.max_iter < 1 || options.check_every < 1) {
    throw std::invalid_argument("sinkhorn: max_iter and check_every must be positive");
  }
  marginals.validate();
  if (static_cast<Eigen::Index>(cost.rows()) != marginals.a.size() ||
      static_cast<Eigen::Index>(cost.cols()) != marginals.b.size()) {
    throw ShapeError("sinkhorn: cost shape does not match marginals");
  }

  const double scale = cost.max_entry > 0.0 ? cost.max_entry : 1.0;
  const Matrix normalized = cost.values / scale;
  const double eps = options.epsilon;
  const Matrix kernel = (-normalized.array() / eps).exp().matrix();

  TransportPlan out;
  out.epsilon = eps;

  Vector u = Vector::Ones(marginals.a.size());
  Vector v = Vector::Ones(marginals.b.size());
  Vector good_u = u;
  Vector good_v = v;
  bool healthy = true;
  // Violation at the start of the current stall window.
  double window_start = std::numeric_limits<double>::infinity();
  int window_iter = 0;

  while (out.iterations < options.max_iter) {
    ++out.iterations;
    u = marginals.a.cwiseQuotient(kernel * v);
    v = marginals.b.cwiseQuotient(kernel.transpose() * u);
    if (!scalings_healthy(u) || !scalings_healthy(v)) {
      healthy = false;
      break;
    }
    good_u = u;
    good_v = v;
    if (out.iterations % options.check_every == 0 || out.iterations == options.max_iter) {
      const Matrix plan = u.asDiagonal() * kernel * v.asDiagonal();
      out.marginal_violation = marginal_violation(plan, marginals);
      if (out.marginal_violation <= options.tol) {
        out.converged = true;
        out.values = plan;
        return out;
      }
      if (out.iterations - window_iter >= kStallWindow) {
        if (out.marginal_violation > 0.5 * window_start) {
          healthy = false;
          break;
        }
        window_start = out.marginal_violation;
        window_iter = out.iterations;
      }
    }
  }

  if (healthy) {
    out.values = u.asDiagonal() * kernel * v.asDiagonal();
    out.marginal_violation = marginal_violation(out.values, marginals);
    return out;
  }

  // Overflow or stall: absorb the last healthy scalings into dual potentials
  // and continue in log space.
  out.stabilized = true;
  LogState state{(eps * good_u.array().log()).matrix(), (eps * good_v.array().log()).matrix()};
  log_sinkhorn(normalized, marginals, options, state, out);
  return out;
}

ExactAssignment exact_ot_uniform_small(const Matrix& cost) {
  const Eigen::Index n = cost.rows();
  if (n == 0 || cost.cols() != n) throw ShapeError("exact_ot_uniform_small: cost must be square and nonempty");
  if (n > 8) throw std::invalid_argument("exact_ot_uniform_small: n > 8 is not supported");

  std::vector<std::size_t> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  ExactAssignment best;
  best.cost = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += cost(i, static_cast<Eigen::Index>(perm[i]));
    if (total < best.cost) {
      best.cost = total;
      best.assignment = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  best.cost /= static_cast<double>(n);
  return best;
}

double entropic_linear_cost(const Matrix& plan, const Matrix& cost) {
  if (plan.rows() != cost.rows() || plan.cols() != cost.cols()) {
    throw ShapeError("entropic_linear_cost: plan and cost shapes differ");
  }
  return plan.cwiseProduct(cost).sum();
}

}  // namespace otp

#include "otp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace otp {

namespace {

void check_pair(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("label sequences differ in length");
  if (truth.empty()) throw std::invalid_argument("label sequences are empty");
}

struct Contingency {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows;
  std::map<int, double> cols;
  double n = 0.0;
};

Contingency tabulate(std::span<const int> truth, std::span<const int> predicted) {
  Contingency c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    c.joint[{truth[i], predicted[i]}] += 1.0;
    c.rows[truth[i]] += 1.0;
    c.cols[predicted[i]] += 1.0;
  }
  c.n = static_cast<double>(truth.size());
  return c;
}

double entropy(const std::map<int, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [_, count] : counts) {
    const double p = count / n;
    h -= p * std::log(p);
  }
  return h;
}

double pairs(double m) { return m * (m - 1.0) / 2.0; }

}  // namespace

double accuracy(std::span<const int> truth, std::span<const int> predicted) {
  check_pair(truth, predicted);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double nmi(std::span<const int> truth, std::span<const int> predicted) {
  check_pair(truth, predicted);
  const Contingency c = tabulate(truth, predicted);
  const double h_truth = entropy(c.rows, c.n);
  const double h_pred = entropy(c.cols, c.n);
  const bool trivial_truth = c.rows.size() == 1;
  const bool trivial_pred = c.cols.size() == 1;
  if (trivial_truth && trivial_pred) return 1.0;
  if (trivial_truth || trivial_pred) return 0.0;

  // I = H(Y) - H(Y | Yhat)
  double h_conditional = 0.0;
  for (const auto& [key, count] : c.joint) {
    const double col = c.cols.at(key.second);
    h_conditional -= (count / c.n) * std::log(count / col);
  }
  const double mutual = h_truth - h_conditional;
  return std::clamp(2.0 * mutual / (h_truth + h_pred), 0.0, 1.0);
}

double ari(std::span<const int> truth, std::span<const int> predicted) {
  check_pair(truth, predicted);
  if (truth.size() < 2) throw std::invalid_argument("ari needs at least two points");
  const Contingency c = tabulate(truth, predicted);
  double index = 0.0;
  for (const auto& [_, count] : c.joint) index += pairs(count);
  double sum_rows = 0.0;
  for (const auto& [_, count] : c.rows) sum_rows += pairs(count);
  double sum_cols = 0.0;
  for (const auto& [_, count] : c.cols) sum_cols += pairs(count);
  const double expected = sum_rows * sum_cols / pairs(c.n);
  const double max_index = 0.5 * (sum_rows + sum_cols);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

std::map<std::string, double> score_measure(const std::map<std::string, std::vector<double>>& performance) {
  std::map<std::string, double> out;
  if (performance.empty()) return out;
  const std::size_t datasets = performance.begin()->second.size();
  for (const auto& [name, values] : performance) {
    if (values.size() != datasets) {
      throw std::invalid_argument("score_measure: algorithm '" + name + "' is missing dataset cells");
    }
    for (double v : values) {
      if (!(v > 0.0)) throw std::invalid_argument("score_measure: performances must be positive");
    }
  }
  std::vector<double> best(datasets, 0.0);
  for (const auto& [_, values] : performance) {
    for (std::size_t d = 0; d < datasets; ++d) best[d] = std::max(best[d], values[d]);
  }
  for (const auto& [name, values] : performance) {
    double total = 0.0;
    for (std::size_t d = 0; d < datasets; ++d) total += values[d] / best[d];
    out[name] = total;
  }
  return out;
}

}  // namespace otp

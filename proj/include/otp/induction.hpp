#pragma once

#include "otp/common.hpp"
#include "otp/propagation.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace otp {

/// Frozen transductive result used to label unseen points.
///
/// Anchors are every training point (initially labeled, then initially
/// unlabeled) with its final label as a class index in [0, num_classes).
/// Weights of a new point are the Gibbs kernel exp(-||x_i - x||^2 / kernel_scale)
/// at the temperature of the last transduction round.
struct InductionModel {
  Matrix anchors;
  std::vector<int> labels;
  int num_classes = 0;
  double kernel_scale = 1.0;

  /// Throws unless every anchor has a label in range and kernel_scale > 0.
  void validate() const;
};

InductionModel make_induction_model(const Matrix& labeled, std::span<const int> labels,
                                    const Matrix& unlabeled, const PropagationResult& transduction,
                                    int num_classes);

Vector induction_weights(std::span<const double> point, const InductionModel& model);

/// argmax_k of the summed weights of class k; ties go to the lowest index.
int weighted_vote(const Vector& weights, std::span<const int> labels, int num_classes);

int induce_label(std::span<const double> point, const InductionModel& model);

struct SignedValue {
  double value;  // in [-1, 1]
  int sign;      // +1 or -1; an exact zero counts as +1
};

/// Binary regression form. Class index 0 is read as +1 and class index 1 as
/// -1, so the lowest-index tie rule of the vote and the zero-sign rule agree.
/// Rejects models with num_classes != 2.
SignedValue induce_value(std::span<const double> point, const InductionModel& model);

/// Anchor table: `kernel_scale,<v>`, then `classes,<name>...`, then a header
/// `f0,...,f{d-1},label` and one row per anchor. Labels are written as class
/// indices so the file reloads without the original dataset.
void save_model(std::ostream& out, const InductionModel& model,
                std::span<const std::string> class_names);

struct LoadedModel {
  InductionModel model;
  std::vector<std::string> class_names;
};

LoadedModel load_model(std::istream& in);

}  // namespace otp

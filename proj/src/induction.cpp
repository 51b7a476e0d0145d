#include "otp/induction.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace otp {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text, std::size_t row) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw std::invalid_argument("model file: bad number '" + text + "' on line " + std::to_string(row));
  }
  return v;
}

Vector squared_distances(std::span<const double> point, const InductionModel& model) {
  if (static_cast<Eigen::Index>(point.size()) != model.anchors.cols()) {
    throw ShapeError("induction: point has " + std::to_string(point.size()) + " features, model has " +
                     std::to_string(model.anchors.cols()));
  }
  Vector d(model.anchors.rows());
  for (Eigen::Index i = 0; i < model.anchors.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index f = 0; f < model.anchors.cols(); ++f) {
      const double diff = model.anchors(i, f) - point[static_cast<std::size_t>(f)];
      acc += diff * diff;
    }
    d[i] = acc;
  }
  return d;
}

// Weights divided by the largest one. The vote and the weighted average are
// both invariant to this, and it keeps far-away points from underflowing to
// an all-zero vector.
Vector relative_weights(std::span<const double> point, const InductionModel& model) {
  model.validate();
  const Vector d = squared_distances(point, model);
  const double nearest = d.minCoeff();
  return (-(d.array() - nearest) / model.kernel_scale).exp().matrix();
}

std::vector<double> class_sums(const Vector& weights, std::span<const int> labels, int num_classes) {
  std::vector<double> sums(static_cast<std::size_t>(num_classes), 0.0);
  for (Eigen::Index i = 0; i < weights.size(); ++i) sums[static_cast<std::size_t>(labels[i])] += weights[i];
  return sums;
}

}  // namespace

void InductionModel::validate() const {
  if (anchors.rows() == 0) throw std::invalid_argument("induction model has no anchors");
  if (static_cast<Eigen::Index>(labels.size()) != anchors.rows()) {
    throw ShapeError("induction model: one label per anchor required");
  }
  if (num_classes < 1) throw std::invalid_argument("induction model: num_classes must be positive");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw std::invalid_argument("induction model: anchor label out of range");
  }
  if (!(kernel_scale > 0.0) || !std::isfinite(kernel_scale)) {
    throw std::invalid_argument("induction model: kernel_scale must be positive");
  }
}

InductionModel make_induction_model(const Matrix& labeled, std::span<const int> labels,
                                    const Matrix& unlabeled, const PropagationResult& transduction,
                                    int num_classes) {
  if (labeled.cols() != unlabeled.cols()) throw ShapeError("make_induction_model: feature dimensions differ");
  if (static_cast<Eigen::Index>(transduction.labels.size()) != unlabeled.rows() ||
      static_cast<Eigen::Index>(labels.size()) != labeled.rows()) {
    throw ShapeError("make_induction_model: label counts do not match point counts");
  }
  InductionModel model;
  model.anchors.resize(labeled.rows() + unlabeled.rows(), labeled.cols());
  model.anchors.topRows(labeled.rows()) = labeled;
  model.anchors.bottomRows(unlabeled.rows()) = unlabeled;
  model.labels.assign(labels.begin(), labels.end());
  model.labels.insert(model.labels.end(), transduction.labels.begin(), transduction.labels.end());
  model.num_classes = num_classes;
  model.kernel_scale = transduction.kernel_scale;
  model.validate();
  return model;
}

Vector induction_weights(std::span<const double> point, const InductionModel& model) {
  model.validate();
  return (-squared_distances(point, model).array() / model.kernel_scale).exp().matrix();
}

int weighted_vote(const Vector& weights, std::span<const int> labels, int num_classes) {
  if (static_cast<Eigen::Index>(labels.size()) != weights.size()) {
    throw ShapeError("weighted_vote: one label per weight required");
  }
  if (num_classes < 1) throw std::invalid_argument("weighted_vote: num_classes must be positive");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw std::invalid_argument("weighted_vote: label out of range");
  }
  const std::vector<double> sums = class_sums(weights, labels, num_classes);
  return static_cast<int>(std::max_element(sums.begin(), sums.end()) - sums.begin());
}

int induce_label(std::span<const double> point, const InductionModel& model) {
  return weighted_vote(relative_weights(point, model), model.labels, model.num_classes);
}

SignedValue induce_value(std::span<const double> point, const InductionModel& model) {
  if (model.num_classes != 2) throw std::invalid_argument("induce_value: model must be binary");
  const std::vector<double> sums = class_sums(relative_weights(point, model), model.labels, 2);
  // Class 0 is +1, class 1 is -1.
  const double value = (sums[0] - sums[1]) / (sums[0] + sums[1]);
  return {value, value < 0.0 ? -1 : +1};
}

void save_model(std::ostream& out, const InductionModel& model,
                std::span<const std::string> class_names) {
  model.validate();
  if (static_cast<int>(class_names.size()) != model.num_classes) {
    throw std::invalid_argument("save_model: one name per class required");
  }
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "kernel_scale," << model.kernel_scale << '\n';
  out << "classes";
  for (const std::string& name : class_names) out << ',' << name;
  out << '\n';
  for (Eigen::Index f = 0; f < model.anchors.cols(); ++f) out << 'f' << f << ',';
  out << "label\n";
  for (Eigen::Index i = 0; i < model.anchors.rows(); ++i) {
    for (Eigen::Index f = 0; f < model.anchors.cols(); ++f) out << model.anchors(i, f) << ',';
    out << model.labels[static_cast<std::size_t>(i)] << '\n';
  }
  out.precision(old_precision);
}

LoadedModel load_model(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };

  LoadedModel loaded;
  if (!next()) throw std::invalid_argument("model file: empty");
  auto fields = split_fields(line);
  if (fields.size() != 2 || fields[0] != "kernel_scale") {
    throw std::invalid_argument("model file: expected 'kernel_scale,<value>' on line 1");
  }
  loaded.model.kernel_scale = parse_double(fields[1], line_no);

  if (!next()) throw std::invalid_argument("model file: missing classes line");
  fields = split_fields(line);
  if (fields.size() < 2 || fields[0] != "classes") {
    throw std::invalid_argument("model file: expected 'classes,...' on line 2");
  }
  loaded.class_names.assign(fields.begin() + 1, fields.end());
  loaded.model.num_classes = static_cast<int>(loaded.class_names.size());

  if (!next()) throw std::invalid_argument("model file: missing header");
  const std::size_t width = split_fields(line).size();
  if (width < 2) throw std::invalid_argument("model file: header needs features and a label");
  const std::size_t dims = width - 1;

  std::vector<double> values;
  while (next()) {
    fields = split_fields(line);
    if (fields.size() != width) {
      throw std::invalid_argument("model file: line " + std::to_string(line_no) + " has " +
                                  std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(width));
    }
    for (std::size_t f = 0; f < dims; ++f) values.push_back(parse_double(fields[f], line_no));
    loaded.model.labels.push_back(static_cast<int>(parse_double(fields[dims], line_no)));
  }
  const auto rows = static_cast<Eigen::Index>(loaded.model.labels.size());
  loaded.model.anchors = Eigen::Map<const Matrix>(values.data(), rows, static_cast<Eigen::Index>(dims));
  loaded.model.validate();
  return loaded;
}

}  // namespace otp

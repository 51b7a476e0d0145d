#include "otp/baseline_lp.hpp"
#include "otp/dataset.hpp"
#include "otp/induction.hpp"
#include "otp/metrics.hpp"
#include "otp/ot_core.hpp"
#include "otp/propagation.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using otp::Matrix;
using otp::Vector;

namespace {

using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

std::vector<int> to_labels(const IntArray& a) {
  if (a.ndim() != 1) throw otp::ShapeError("labels must be one-dimensional");
  return {a.data(), a.data() + a.size()};
}

IntArray to_array(const std::vector<int>& v) {
  IntArray out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

otp::InductionModel model_of(const Matrix& anchors, const IntArray& labels, int num_classes, double kernel_scale) {
  otp::InductionModel m;
  m.anchors = anchors;
  m.labels = to_labels(labels);
  m.num_classes = num_classes;
  m.kernel_scale = kernel_scale;
  m.validate();
  return m;
}

std::span<const double> row_span(const Matrix& points, Eigen::Index i) {
  return {points.row(i).data(), static_cast<std::size_t>(points.cols())};
}

py::dict propagate(const Matrix& labeled, const IntArray& labels, const Matrix& unlabeled, int num_classes,
                   double epsilon, double alpha, double tol, int max_iter) {
  otp::PropagationConfig config{epsilon, alpha, tol, max_iter};
  const std::vector<int> y = to_labels(labels);
  otp::PropagationResult r;
  {
    py::gil_scoped_release release;
    r = otp::propagate(labeled, y, unlabeled, num_classes, config);
  }
  std::vector<double> certainty;
  std::vector<int> labeled_at;
  for (const otp::PointRecord& p : r.trace.points) {
    certainty.push_back(p.certainty);
    labeled_at.push_back(p.iteration);
  }
  py::list iterations;
  for (const otp::IterationRecord& it : r.trace.iterations) {
    py::dict d;
    d["t"] = it.t;
    d["m_t"] = it.labeled;
    d["n_t"] = it.unlabeled;
    d["zeta_t"] = it.newly_labeled;
    d["alpha_used"] = it.alpha_used;
    d["relaxed"] = it.relaxed;
    d["sinkhorn_iterations"] = it.sinkhorn_iterations;
    d["sinkhorn_converged"] = it.sinkhorn_converged;
    iterations.append(d);
  }
  py::dict out;
  out["labels"] = to_array(r.labels);
  out["certainty"] = Vector(Eigen::Map<const Vector>(certainty.data(), static_cast<Eigen::Index>(certainty.size())));
  out["labeled_at"] = to_array(labeled_at);
  out["iterations"] = iterations;
  out["kernel_scale"] = r.kernel_scale;
  out["warnings"] = r.trace.warnings;
  return out;
}

}  // namespace

PYBIND11_MODULE(_otp, m) {
  m.doc() = "Optimal transport label propagation";

  py::register_exception<otp::ShapeError>(m, "ShapeError", PyExc_ValueError);

  m.def("pairwise_sq_dist", [](const Matrix& a, const Matrix& b) { return otp::pairwise_sq_dist(a, b).values; },
        py::arg("source"), py::arg("target"));

  m.def(
      "sinkhorn",
      [](const Matrix& cost, std::optional<Vector> a, std::optional<Vector> b, double epsilon, double tol,
         int max_iter) {
        otp::Marginals marg = otp::Marginals::uniform(static_cast<std::size_t>(cost.rows()),
                                                      static_cast<std::size_t>(cost.cols()));
        if (a) marg.a = *a;
        if (b) marg.b = *b;
        otp::SinkhornOptions opt;
        opt.epsilon = epsilon;
        opt.tol = tol;
        opt.max_iter = max_iter;
        const otp::CostMatrix c{cost, cost.size() ? cost.maxCoeff() : 0.0};
        otp::TransportPlan p;
        {
          py::gil_scoped_release release;
          p = otp::sinkhorn(c, marg, opt);
        }
        py::dict out;
        out["plan"] = p.values;
        out["iterations"] = p.iterations;
        out["marginal_violation"] = p.marginal_violation;
        out["converged"] = p.converged;
        out["stabilized"] = p.stabilized;
        return out;
      },
      py::arg("cost"), py::arg("a") = py::none(), py::arg("b") = py::none(), py::arg("epsilon") = 0.1,
      py::arg("tol") = 1e-9, py::arg("max_iter") = 10000,
      "Entropic OT plan; epsilon is relative to the largest cost entry. Marginals default to uniform.");

  m.def(
      "exact_ot_uniform_small",
      [](const Matrix& cost) {
        const otp::ExactAssignment e = otp::exact_ot_uniform_small(cost);
        return py::make_tuple(e.cost, e.assignment);
      },
      py::arg("cost"));

  m.def(
      "certainty_scores",
      [](const Matrix& probabilities) {
        otp::ClassProbabilityMatrix u;
        u.values = probabilities;
        for (int k = 0; k < probabilities.cols(); ++k) u.class_ids.push_back(k);
        return otp::certainty_scores(u).scores;
      },
      py::arg("probabilities"));

  m.def("propagate", &propagate, py::arg("labeled"), py::arg("labels"), py::arg("unlabeled"),
        py::arg("num_classes"), py::arg("epsilon") = 0.1, py::arg("alpha") = 0.8, py::arg("tol") = 1e-9,
        py::arg("max_iter") = 10000);

  m.def(
      "induce_labels",
      [](const Matrix& anchors, const IntArray& labels, int num_classes, double kernel_scale, const Matrix& points) {
        const otp::InductionModel model = model_of(anchors, labels, num_classes, kernel_scale);
        std::vector<int> out;
        for (Eigen::Index i = 0; i < points.rows(); ++i) out.push_back(otp::induce_label(row_span(points, i), model));
        return to_array(out);
      },
      py::arg("anchors"), py::arg("labels"), py::arg("num_classes"), py::arg("kernel_scale"), py::arg("points"));

  m.def(
      "induce_values",
      [](const Matrix& anchors, const IntArray& labels, double kernel_scale, const Matrix& points) {
        const otp::InductionModel model = model_of(anchors, labels, 2, kernel_scale);
        Vector out(points.rows());
        for (Eigen::Index i = 0; i < points.rows(); ++i) out[i] = otp::induce_value(row_span(points, i), model).value;
        return out;
      },
      py::arg("anchors"), py::arg("labels"), py::arg("kernel_scale"), py::arg("points"),
      "Binary signed vote in [-1, 1]; class 0 counts as +1 and class 1 as -1.");

  m.def(
      "lp_propagate",
      [](const Matrix& points, const IntArray& labels, int num_classes, double sigma, double tol, int max_iter) {
        const std::vector<int> y = to_labels(labels);
        otp::LpOptions opt{tol, max_iter};
        py::gil_scoped_release release;
        return otp::lp_propagate(otp::gaussian_affinity(points, sigma), y, num_classes, opt).labels;
      },
      py::arg("points"), py::arg("labels"), py::arg("num_classes"), py::arg("sigma"), py::arg("tol") = 1e-6,
      py::arg("max_iter") = 1000, "Labels rows len(labels).. of points; the first len(labels) rows are labeled.");

  m.def("accuracy", [](const IntArray& t, const IntArray& p) { return otp::accuracy(to_labels(t), to_labels(p)); });
  m.def("nmi", [](const IntArray& t, const IntArray& p) { return otp::nmi(to_labels(t), to_labels(p)); });
  m.def("ari", [](const IntArray& t, const IntArray& p) { return otp::ari(to_labels(t), to_labels(p)); });
  m.def("score_measure", &otp::score_measure, py::arg("performance"));

  m.def(
      "load_csv",
      [](const std::filesystem::path& path, const std::string& label_column, bool standardize) {
        otp::CsvOptions opt;
        opt.standardize = standardize;
        const otp::Dataset ds = otp::load_csv(path, label_column, opt);
        py::dict out;
        out["name"] = ds.name;
        out["features"] = ds.features;
        out["labels"] = to_array(ds.labels);
        out["num_classes"] = ds.num_classes;
        out["class_names"] = ds.class_names;
        out["feature_names"] = ds.feature_names;
        return out;
      },
      py::arg("path"), py::arg("label_column") = "class", py::arg("standardize") = true);

  m.def(
      "make_split",
      [](const IntArray& labels, double fraction, std::uint64_t seed) {
        otp::Dataset ds;
        ds.labels = to_labels(labels);
        ds.num_classes = ds.labels.empty() ? 0 : *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
        const otp::SplitMask mask = otp::make_split(ds, fraction, seed);
        return py::make_tuple(mask.labeled, mask.unlabeled);
      },
      py::arg("labels"), py::arg("fraction"), py::arg("seed"),
      "Stratified split of dense class indices; returns (labeled, unlabeled) index lists.");
}

// otp: command-line front end for transduction, induction, benchmarks and metrics.

#include "otp/benchmark.hpp"
#include "otp/dataset.hpp"
#include "otp/induction.hpp"
#include "otp/metrics.hpp"
#include "otp/propagation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

std::string fmt(double v, int precision = 10) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

// Column of a headed CSV, by name or (when empty) the last column.
std::vector<std::string> read_column(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::vector<std::string> out;
  std::size_t idx = 0;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (header) {
      header = false;
      if (column.empty()) {
        idx = fields.size() - 1;
      } else {
        auto it = std::find(fields.begin(), fields.end(), column);
        if (it == fields.end()) throw std::runtime_error(path + ": no column named '" + column + "'");
        idx = static_cast<std::size_t>(it - fields.begin());
      }
      continue;
    }
    if (idx >= fields.size()) throw std::runtime_error(path + ": short row");
    out.push_back(fields[idx]);
  }
  return out;
}

int run_transduce(const std::string& data, const std::string& label_col, double fraction, std::uint64_t seed,
                  const otp::PropagationConfig& config, bool no_standardize, const std::string& out_path,
                  const std::string& model_path, const std::string& trace_path) {
  otp::CsvOptions options;
  options.standardize = !no_standardize;
  const otp::Dataset ds = otp::load_csv(data, label_col, options);
  const otp::SplitMask mask = otp::make_split(ds, fraction, seed);
  if (mask.unlabeled.empty()) throw std::runtime_error("split leaves no unlabeled points");

  const otp::Matrix labeled = otp::select_rows(ds.features, mask.labeled);
  const otp::Matrix unlabeled = otp::select_rows(ds.features, mask.unlabeled);
  const std::vector<int> given = otp::select(ds.labels, mask.labeled);
  const otp::PropagationResult result = otp::propagate(labeled, given, unlabeled, ds.num_classes, config);

  auto out = open_out(out_path);
  out << "index,true,predicted,certainty,iteration\n";
  for (std::size_t j = 0; j < mask.unlabeled.size(); ++j) {
    const std::size_t row = mask.unlabeled[j];
    const otp::PointRecord& p = result.trace.points[j];
    out << row << ',' << ds.class_names[static_cast<std::size_t>(ds.labels[row])] << ','
        << ds.class_names[static_cast<std::size_t>(result.labels[j])] << ',' << fmt(p.certainty) << ','
        << p.iteration << '\n';
  }
  if (!model_path.empty()) {
    auto model_out = open_out(model_path);
    otp::save_model(model_out, otp::make_induction_model(labeled, given, unlabeled, result, ds.num_classes),
                    ds.class_names);
  }
  if (!trace_path.empty()) {
    auto trace_out = open_out(trace_path);
    otp::write_trace_csv(trace_out, result.trace);
  }
  for (const std::string& w : result.trace.warnings) std::cerr << "warning: " << w << '\n';

  const std::vector<int> truth = otp::select(ds.labels, mask.unlabeled);
  std::cerr << "labeled " << mask.labeled.size() << ", transduced " << mask.unlabeled.size() << " in "
            << result.trace.iterations.size() << " iterations; acc=" << fmt(otp::accuracy(truth, result.labels), 6)
            << '\n';
  return 0;
}

int run_induct(const std::string& model_path, const std::string& points_path, const std::string& out_path) {
  std::ifstream in(model_path);
  if (!in) throw std::runtime_error("cannot open " + model_path);
  const otp::LoadedModel loaded = otp::load_model(in);
  const otp::Matrix points = otp::load_points_csv(points_path);
  auto out = open_out(out_path);
  out << "index,predicted\n";
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const auto row = points.row(i);
    const int label = otp::induce_label(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())),
                                        loaded.model);
    out << i << ',' << loaded.class_names[static_cast<std::size_t>(label)] << '\n';
  }
  return 0;
}

int run_benchmark_cmd(const std::string& config_path, const std::string& out_dir, bool large, int threads) {
  otp::BenchmarkConfig config = otp::load_benchmark_config(config_path);
  if (large) config.large = true;
  if (threads > 0) config.threads = threads;
  const otp::BenchmarkReport report = otp::run_benchmark(config);
  if (config.algorithms.empty() || (report.cells.empty() && report.failures.empty())) {
    std::cerr << "no cells to run\n";
    return 0;
  }
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  otp::emit_results(report, otp::ResultFormat::kCsv, dir / "results.csv");
  otp::emit_results(report, otp::ResultFormat::kJson, dir / "results.json");
  otp::emit_traces(report, dir / "traces");
  for (const otp::Aggregate& a : report.aggregates) {
    std::cout << a.dataset << ' ' << fmt(a.fraction) << ' ' << a.algorithm << " acc=" << fmt(a.acc_mean, 4)
              << "+-" << fmt(a.acc_std, 2) << " nmi=" << fmt(a.nmi_mean, 4) << " ari=" << fmt(a.ari_mean, 4)
              << '\n';
  }
  for (const otp::CellFailure& f : report.failures) {
    std::cerr << "failed: " << f.dataset << ' ' << fmt(f.fraction) << ' ' << f.seed << ' ' << f.algorithm
              << ": " << f.error << '\n';
  }
  for (const std::string& n : report.notes) std::cerr << "note: " << n << '\n';
  return report.failures.empty() ? 0 : 1;
}

int run_metrics(const std::string& truth_path, const std::string& pred_path, const std::string& truth_col,
                const std::string& pred_col) {
  const auto truth_text = read_column(truth_path, truth_col);
  const auto pred_text = read_column(pred_path, pred_col);
  std::map<std::string, int> ids;
  auto encode = [&](const std::vector<std::string>& text) {
    std::vector<int> out;
    for (const std::string& t : text) out.push_back(ids.try_emplace(t, static_cast<int>(ids.size())).first->second);
    return out;
  };
  const std::vector<int> truth = encode(truth_text);
  const std::vector<int> pred = encode(pred_text);
  std::cout << "acc=" << fmt(otp::accuracy(truth, pred)) << '\n'
            << "nmi=" << fmt(otp::nmi(truth, pred)) << '\n'
            << "ari=" << fmt(otp::ari(truth, pred)) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal transport label propagation"};
  app.require_subcommand(1);

  auto* transduce = app.add_subcommand("transduce", "Label the unlabeled part of a seeded split");
  std::string data, label_col = "class", out_path, model_path, trace_path;
  double fraction = 0.25;
  std::uint64_t seed = 0;
  bool no_standardize = false;
  otp::PropagationConfig config;
  transduce->add_option("--data", data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  transduce->add_option("--label-col", label_col, "Label column name")->capture_default_str();
  transduce->add_option("--labeled-frac", fraction, "Labeled fraction")->capture_default_str();
  transduce->add_option("--seed", seed, "Split seed")->capture_default_str();
  transduce->add_option("--epsilon", config.epsilon, "Relative entropic regularization")->capture_default_str();
  transduce->add_option("--alpha", config.alpha, "Certainty threshold")->capture_default_str();
  transduce->add_flag("--no-standardize", no_standardize, "Keep raw feature scales");
  transduce->add_option("--out", out_path, "Prediction CSV")->required();
  transduce->add_option("--model", model_path, "Also write an induction model");
  transduce->add_option("--trace", trace_path, "Also write the iteration trace");

  auto* induct = app.add_subcommand("induct", "Label new points with a saved model");
  std::string induct_model, points_path, induct_out;
  induct->add_option("--model", induct_model, "Model file")->required()->check(CLI::ExistingFile);
  induct->add_option("--points", points_path, "Points CSV (header, numeric columns)")
      ->required()
      ->check(CLI::ExistingFile);
  induct->add_option("--out", induct_out, "Output CSV")->required();

  auto* bench = app.add_subcommand("benchmark", "Run the benchmark protocol");
  std::string config_path, out_dir;
  bool large = false;
  int threads = 0;
  bench->add_option("--config", config_path, "Benchmark JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--out-dir", out_dir, "Output directory")->required();
  bench->add_flag("--large", large, "Include datasets above the size cap");
  bench->add_option("--threads", threads, "Worker threads (overrides config)");

  auto* metrics = app.add_subcommand("metrics", "ACC/NMI/ARI between two label columns");
  std::string truth_path, pred_path, truth_col, pred_col;
  metrics->add_option("--truth", truth_path, "Truth CSV")->required()->check(CLI::ExistingFile);
  metrics->add_option("--pred", pred_path, "Prediction CSV")->required()->check(CLI::ExistingFile);
  metrics->add_option("--truth-col", truth_col, "Truth column (default: last)");
  metrics->add_option("--pred-col", pred_col, "Prediction column (default: last)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*transduce) {
      return run_transduce(data, label_col, fraction, seed, config, no_standardize, out_path, model_path,
                           trace_path);
    }
    if (*induct) return run_induct(induct_model, points_path, induct_out);
    if (*bench) return run_benchmark_cmd(config_path, out_dir, large, threads);
    if (*metrics) return run_metrics(truth_path, pred_path, truth_col, pred_col);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

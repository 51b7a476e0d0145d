#include "otp/benchmark.hpp"

#include "number_format.hpp"
#include "otp/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

namespace otp {

namespace {

using json = nlohmann::ordered_json;

struct Task {
  std::size_t dataset;
  double fraction;
  std::uint64_t seed;
  std::string algorithm;
};

struct Scored {
  double acc = 0.0, nmi = 0.0, ari = 0.0, runtime_s = 0.0;
  int rounds = 0;
  int relaxed_rounds = 0;
  std::vector<std::string> warnings;
  PropagationTrace trace;
};

struct TaskOutput {
  std::vector<Scored> runs;  // one for otp, one per sigma for lp
  std::string error;
};

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void score(Scored& s, std::span<const int> truth, std::span<const int> predicted) {
  s.acc = accuracy(truth, predicted);
  s.nmi = nmi(truth, predicted);
  s.ari = ari(truth, predicted);
}

TaskOutput run_task(const Dataset& ds, const Task& task, const BenchmarkConfig& config) {
  TaskOutput out;
  try {
    const SplitMask mask = make_split(ds, task.fraction, task.seed);
    if (mask.unlabeled.empty()) throw std::invalid_argument("split leaves no unlabeled points");
    const std::vector<int> truth = select(ds.labels, mask.unlabeled);
    const std::vector<int> given = select(ds.labels, mask.labeled);

    if (task.algorithm == "otp") {
      const auto start = std::chrono::steady_clock::now();
      const PropagationResult r = propagate(select_rows(ds.features, mask.labeled), given,
                                            select_rows(ds.features, mask.unlabeled), ds.num_classes,
                                            config.otp);
      Scored s;
      s.runtime_s = elapsed(start);
      score(s, truth, r.labels);
      s.rounds = static_cast<int>(r.trace.iterations.size());
      for (const IterationRecord& rec : r.trace.iterations) s.relaxed_rounds += rec.relaxed ? 1 : 0;
      s.warnings = r.trace.warnings;
      s.trace = r.trace;
      out.runs.push_back(std::move(s));
    } else if (task.algorithm == "lp") {
      // Labeled rows first, as lp_propagate expects.
      std::vector<std::size_t> order = mask.labeled;
      order.insert(order.end(), mask.unlabeled.begin(), mask.unlabeled.end());
      const Matrix points = select_rows(ds.features, order);
      for (double sigma : config.effective_sigma_grid()) {
        const auto start = std::chrono::steady_clock::now();
        const LpResult r = lp_propagate(gaussian_affinity(points, sigma), given, ds.num_classes, config.lp);
        Scored s;
        s.runtime_s = elapsed(start);
        score(s, truth, r.labels);
        s.rounds = r.iterations;
        if (!r.converged) {
          s.warnings.push_back("lp stopped at max_iter with change " + detail::format_number(r.final_change));
        }
        out.runs.push_back(std::move(s));
      }
    } else {
      throw std::invalid_argument("unknown algorithm '" + task.algorithm + "'");
    }
  } catch (const std::exception& e) {
    out.runs.clear();
    out.error = e.what();
  }
  return out;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double total = 0.0;
  for (double x : v) total += x;
  const double mean = total / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

auto cell_key(const CellResult& c) { return std::tie(c.dataset, c.fraction, c.seed, c.algorithm); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::vector<double> BenchmarkConfig::effective_sigma_grid() const {
  if (!sigma_grid.empty()) return sigma_grid;
  std::vector<double> grid;
  for (int i = 1; i <= 30; ++i) grid.push_back(static_cast<double>(i) / 10.0);
  return grid;
}

BenchmarkConfig parse_benchmark_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  const auto doc = nlohmann::json::parse(json_text);
  BenchmarkConfig config;
  for (const auto& entry : doc.at("datasets")) {
    DatasetSpec spec;
    std::filesystem::path p = entry.at("path").get<std::string>();
    spec.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    spec.name = entry.value("name", p.stem().string());
    spec.label_column = entry.value("label_col", std::string("class"));
    spec.standardize = entry.value("standardize", true);
    config.datasets.push_back(std::move(spec));
  }
  if (doc.contains("fractions")) config.fractions = doc["fractions"].get<std::vector<double>>();
  if (doc.contains("seeds")) config.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
  if (doc.contains("algorithms")) config.algorithms = doc["algorithms"].get<std::vector<std::string>>();
  for (const std::string& a : config.algorithms) {
    if (a != "otp" && a != "lp") throw std::invalid_argument("config: unknown algorithm '" + a + "'");
  }
  config.otp.epsilon = doc.value("epsilon", config.otp.epsilon);
  config.otp.alpha = doc.value("alpha", config.otp.alpha);
  if (doc.contains("sigma_grid")) config.sigma_grid = doc["sigma_grid"].get<std::vector<double>>();
  if (doc.contains("tolerances")) {
    const auto& tol = doc["tolerances"];
    config.otp.tol = tol.value("sinkhorn_tol", config.otp.tol);
    config.otp.max_iter = tol.value("sinkhorn_max_iter", config.otp.max_iter);
    config.lp.tol = tol.value("lp_tol", config.lp.tol);
    config.lp.max_iter = tol.value("lp_max_iter", config.lp.max_iter);
  }
  config.large = doc.value("large", config.large);
  config.max_points = doc.value("max_points", config.max_points);
  config.record_runtime = doc.value("record_runtime", config.record_runtime);
  config.threads = doc.value("threads", config.threads);
  if (!(config.otp.epsilon > 0.0)) throw std::invalid_argument("config: epsilon must be positive");
  if (!(config.otp.alpha >= 0.0 && config.otp.alpha <= 1.0)) {
    throw std::invalid_argument("config: alpha must lie in [0, 1]");
  }
  for (double s : config.effective_sigma_grid()) {
    if (!(s > 0.0)) throw std::invalid_argument("config: sigma_grid values must be positive");
  }
  return config;
}

BenchmarkConfig load_benchmark_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_benchmark_config(buf.str(), path.parent_path());
}

BenchmarkReport run_benchmark(std::span<const Dataset> datasets, const BenchmarkConfig& config) {
  BenchmarkReport report;
  std::vector<Task> tasks;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    for (double f : config.fractions) {
      for (std::uint64_t seed : config.seeds) {
        for (const std::string& a : config.algorithms) tasks.push_back({d, f, seed, a});
      }
    }
  }

  std::vector<TaskOutput> outputs(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      outputs[i] = run_task(datasets[tasks[i].dataset], tasks[i], config);
    }
  };
  const int threads = std::max(1, config.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  auto make_cell = [&](const Task& task, const Scored& s) {
    CellResult c;
    c.dataset = datasets[task.dataset].name;
    c.fraction = task.fraction;
    c.seed = task.seed;
    c.algorithm = task.algorithm;
    c.acc = s.acc;
    c.nmi = s.nmi;
    c.ari = s.ari;
    c.runtime_s = config.record_runtime ? s.runtime_s : 0.0;
    c.rounds = s.rounds;
    c.relaxed_rounds = s.relaxed_rounds;
    c.warnings = s.warnings;
    c.trace = s.trace;
    return c;
  };

  // LP: choose the sigma with the best mean accuracy per (dataset, fraction).
  const std::vector<double> grid = config.effective_sigma_grid();
  std::map<std::pair<std::size_t, double>, std::vector<std::size_t>> lp_groups;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& task = tasks[i];
    if (!outputs[i].error.empty()) {
      report.failures.push_back(
          {datasets[task.dataset].name, task.fraction, task.seed, task.algorithm, outputs[i].error});
      continue;
    }
    if (task.algorithm == "lp") {
      lp_groups[{task.dataset, task.fraction}].push_back(i);
    } else {
      report.cells.push_back(make_cell(task, outputs[i].runs.front()));
    }
  }
  for (const auto& [key, members] : lp_groups) {
    std::size_t best = 0;
    double best_acc = -1.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      double total = 0.0;
      for (std::size_t i : members) total += outputs[i].runs[g].acc;
      const double mean = total / static_cast<double>(members.size());
      if (mean > best_acc) {
        best_acc = mean;
        best = g;
      }
    }
    for (std::size_t i : members) {
      CellResult c = make_cell(tasks[i], outputs[i].runs[best]);
      c.sigma = grid[best];
      report.cells.push_back(std::move(c));
    }
  }
  std::sort(report.cells.begin(), report.cells.end(),
            [](const CellResult& a, const CellResult& b) { return cell_key(a) < cell_key(b); });
  std::sort(report.failures.begin(), report.failures.end(), [](const CellFailure& a, const CellFailure& b) {
    return std::tie(a.dataset, a.fraction, a.seed, a.algorithm) <
           std::tie(b.dataset, b.fraction, b.seed, b.algorithm);
  });

  // Aggregates in cell order.
  for (std::size_t i = 0; i < report.cells.size();) {
    const CellResult& head = report.cells[i];
    // Algorithms interleave by seed, so collect one group per algorithm.
    std::map<std::string, std::vector<std::size_t>> by_algorithm;
    std::size_t end = i;
    while (end < report.cells.size() && report.cells[end].dataset == head.dataset &&
           report.cells[end].fraction == head.fraction) {
      by_algorithm[report.cells[end].algorithm].push_back(end);
      ++end;
    }
    for (const auto& [algorithm, idx] : by_algorithm) {
      std::vector<double> acc, nmi_v, ari_v;
      for (std::size_t j : idx) {
        acc.push_back(report.cells[j].acc);
        nmi_v.push_back(report.cells[j].nmi);
        ari_v.push_back(report.cells[j].ari);
      }
      Aggregate a;
      a.dataset = head.dataset;
      a.fraction = head.fraction;
      a.algorithm = algorithm;
      a.cells = idx.size();
      std::tie(a.acc_mean, a.acc_std) = mean_std(acc);
      std::tie(a.nmi_mean, a.nmi_std) = mean_std(nmi_v);
      std::tie(a.ari_mean, a.ari_std) = mean_std(ari_v);
      report.aggregates.push_back(a);
    }
    i = end;
  }

  // SCORE per fraction and measure, over datasets every algorithm completed.
  std::map<double, std::map<std::string, std::map<std::string, const Aggregate*>>> table;
  for (const Aggregate& a : report.aggregates) table[a.fraction][a.algorithm][a.dataset] = &a;
  for (const auto& [fraction, per_algorithm] : table) {
    std::map<std::string, int> coverage;
    for (const auto& [_, per_dataset] : per_algorithm) {
      for (const auto& [name, __] : per_dataset) ++coverage[name];
    }
    std::vector<std::string> shared;
    for (const auto& [name, count] : coverage) {
      if (count == static_cast<int>(per_algorithm.size())) shared.push_back(name);
    }
    if (shared.empty()) continue;
    for (const char* measure : {"acc", "nmi", "ari"}) {
      std::map<std::string, std::vector<double>> perf;
      for (const auto& [algorithm, per_dataset] : per_algorithm) {
        for (const std::string& name : shared) {
          const Aggregate* a = per_dataset.at(name);
          const std::string m = measure;
          perf[algorithm].push_back(m == "acc" ? a->acc_mean : m == "nmi" ? a->nmi_mean : a->ari_mean);
        }
      }
      try {
        for (const auto& [algorithm, value] : score_measure(perf)) {
          report.scores.push_back({fraction, measure, algorithm, value});
        }
      } catch (const std::invalid_argument& e) {
        report.notes.push_back("score " + std::string(measure) + " at fraction " +
                               detail::format_number(fraction) + " skipped: " + e.what());
      }
    }
  }
  return report;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  std::vector<Dataset> datasets;
  std::vector<std::string> notes;
  for (const DatasetSpec& spec : config.datasets) {
    CsvOptions options;
    options.standardize = spec.standardize;
    Dataset ds = load_csv(spec.path, spec.label_column, options);
    if (!spec.name.empty()) ds.name = spec.name;
    if (!config.large && ds.size() > config.max_points) {
      notes.push_back("skipped " + ds.name + " (" + std::to_string(ds.size()) +
                      " points); enable large runs to include it");
      continue;
    }
    datasets.push_back(std::move(ds));
  }
  BenchmarkReport report = run_benchmark(datasets, config);
  report.notes.insert(report.notes.begin(), notes.begin(), notes.end());
  return report;
}

void emit_results(const BenchmarkReport& report, ResultFormat format, const std::filesystem::path& path) {
  if (report.cells.empty() && report.failures.empty()) {
    throw std::invalid_argument("emit_results: nothing to write");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  using detail::format_number;

  if (format == ResultFormat::kCsv) {
    out << "dataset,fraction,seed,algorithm,acc,nmi,ari,runtime_s\n";
    for (const CellResult& c : report.cells) {
      out << c.dataset << ',' << format_number(c.fraction) << ',' << c.seed << ',' << c.algorithm << ','
          << format_number(c.acc, 17) << ',' << format_number(c.nmi, 17) << ',' << format_number(c.ari, 17)
          << ',' << format_number(c.runtime_s, 6) << '\n';
    }
  } else {
    json doc;
    json cells = json::array();
    for (const CellResult& c : report.cells) {
      json cell;
      cell["dataset"] = c.dataset;
      cell["fraction"] = c.fraction;
      cell["seed"] = c.seed;
      cell["algorithm"] = c.algorithm;
      cell["acc"] = number_or_null(c.acc);
      cell["nmi"] = number_or_null(c.nmi);
      cell["ari"] = number_or_null(c.ari);
      cell["runtime_s"] = c.runtime_s;
      if (c.algorithm == "lp") cell["sigma"] = c.sigma;
      cell["rounds"] = c.rounds;
      cell["relaxed_rounds"] = c.relaxed_rounds;
      cell["warnings"] = c.warnings;
      cells.push_back(std::move(cell));
    }
    doc["cells"] = std::move(cells);
    json aggregate;
    json means = json::array();
    for (const Aggregate& a : report.aggregates) {
      means.push_back({{"dataset", a.dataset},
                       {"fraction", a.fraction},
                       {"algorithm", a.algorithm},
                       {"cells", a.cells},
                       {"acc_mean", a.acc_mean},
                       {"acc_std", a.acc_std},
                       {"nmi_mean", a.nmi_mean},
                       {"nmi_std", a.nmi_std},
                       {"ari_mean", a.ari_mean},
                       {"ari_std", a.ari_std}});
    }
    aggregate["means"] = std::move(means);
    json scores = json::array();
    for (const ScoreEntry& s : report.scores) {
      scores.push_back(
          {{"fraction", s.fraction}, {"measure", s.measure}, {"algorithm", s.algorithm}, {"score", s.score}});
    }
    aggregate["score"] = std::move(scores);
    doc["aggregate"] = std::move(aggregate);
    json failures = json::array();
    for (const CellFailure& f : report.failures) {
      failures.push_back({{"dataset", f.dataset},
                          {"fraction", f.fraction},
                          {"seed", f.seed},
                          {"algorithm", f.algorithm},
                          {"error", f.error}});
    }
    doc["failures"] = std::move(failures);
    doc["notes"] = report.notes;
    out << doc.dump(2) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void emit_traces(const BenchmarkReport& report, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  for (const CellResult& c : report.cells) {
    if (c.algorithm != "otp") continue;
    const std::string file =
        c.dataset + "_" + detail::format_number(c.fraction) + "_" + std::to_string(c.seed) + ".csv";
    std::ofstream out(directory / file, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (directory / file).string());
    write_trace_csv(out, c.trace);
  }
}

}  // namespace otp

#pragma once

#include "otp/baseline_lp.hpp"
#include "otp/dataset.hpp"
#include "otp/propagation.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace otp {

struct DatasetSpec {
  std::string name;  // defaults to the file stem
  std::filesystem::path path;
  std::string label_column = "class";
  bool standardize = true;
};

struct BenchmarkConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<double> fractions{0.15, 0.25, 0.35};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<std::string> algorithms{"otp"};  // subset of {"otp", "lp"}
  PropagationConfig otp;
  std::vector<double> sigma_grid;  // empty means 0.1, 0.2, ..., 3.0
  LpOptions lp;
  // Datasets above max_points are skipped unless `large` is set.
  bool large = false;
  std::size_t max_points = 600;
  // When false, runtime_s is written as 0 so result files are byte-stable.
  bool record_runtime = true;
  int threads = 1;

  std::vector<double> effective_sigma_grid() const;
};

/// Parses the benchmark JSON. Relative dataset paths are resolved against
/// `base_dir`.
BenchmarkConfig parse_benchmark_config(const std::string& json_text,
                                       const std::filesystem::path& base_dir = {});
BenchmarkConfig load_benchmark_config(const std::filesystem::path& path);

struct CellResult {
  std::string dataset;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::string algorithm;
  double acc = 0.0;
  double nmi = 0.0;
  double ari = 0.0;
  double runtime_s = 0.0;
  double sigma = 0.0;  // lp only: the grid value selected for this dataset and fraction
  int rounds = 0;      // otp: propagation iterations; lp: propagation steps
  int relaxed_rounds = 0;
  std::vector<std::string> warnings;
  PropagationTrace trace;  // otp only
};

struct CellFailure {
  std::string dataset;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::string algorithm;
  std::string error;
};

struct Aggregate {
  std::string dataset;
  double fraction = 0.0;
  std::string algorithm;
  std::size_t cells = 0;
  double acc_mean = 0.0, acc_std = 0.0;
  double nmi_mean = 0.0, nmi_std = 0.0;
  double ari_mean = 0.0, ari_std = 0.0;
};

struct ScoreEntry {
  double fraction = 0.0;
  std::string measure;  // acc, nmi or ari
  std::string algorithm;
  double score = 0.0;
};

struct BenchmarkReport {
  std::vector<CellResult> cells;  // sorted by (dataset, fraction, seed, algorithm)
  std::vector<CellFailure> failures;
  std::vector<Aggregate> aggregates;
  std::vector<ScoreEntry> scores;
  std::vector<std::string> notes;
};

/// Runs every (dataset, fraction, seed, algorithm) cell. Metrics cover the
/// initially unlabeled points only. A failing cell is recorded and the run
/// continues. LP is evaluated over the sigma grid and reported at the sigma
/// with the highest mean accuracy for each dataset and fraction.
BenchmarkReport run_benchmark(std::span<const Dataset> datasets, const BenchmarkConfig& config);

/// Loads the configured datasets (honoring `large`) and runs them.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

enum class ResultFormat { kCsv, kJson };

/// CSV: `dataset,fraction,seed,algorithm,acc,nmi,ari,runtime_s`.
/// JSON: the same cells plus aggregates, SCORE values, failures and notes.
void emit_results(const BenchmarkReport& report, ResultFormat format, const std::filesystem::path& path);

/// One `t,m_t,n_t,zeta_t,alpha_used,relaxed` file per otp cell.
void emit_traces(const BenchmarkReport& report, const std::filesystem::path& directory);

}  // namespace otp

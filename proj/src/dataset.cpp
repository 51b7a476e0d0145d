#include "otp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace otp {

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> out;
  std::string field;
  for (char ch : line) {
    if (ch == delimiter) {
      out.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  out.push_back(field);
  for (std::string& f : out) {
    const auto first = f.find_first_not_of(" \t");
    const auto last = f.find_last_not_of(" \t");
    f = first == std::string::npos ? std::string() : f.substr(first, last - first + 1);
    if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
  }
  return out;
}

bool parse_number(const std::string& text, double& value) {
  if (text.empty()) return false;
  std::size_t used = 0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == text.size() && std::isfinite(value);
}

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

RawTable read_table(const std::filesystem::path& path, char delimiter) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  RawTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_line(line, delimiter);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw std::invalid_argument(path.string() + ": line " + std::to_string(line_no) + " has " +
                                  std::to_string(fields.size()) + " fields, header has " +
                                  std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty()) throw std::invalid_argument(path.string() + ": empty file");
  if (table.rows.empty()) throw std::invalid_argument(path.string() + ": no data rows");
  return table;
}

void standardize_columns(Matrix& x) {
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    const double mean = x.col(f).sum() / n;
    const double var = (x.col(f).array() - mean).square().sum() / n;
    const double sd = std::sqrt(var);
    if (sd > 0.0) {
      x.col(f) = (x.col(f).array() - mean) / sd;
    } else {
      x.col(f).setZero();
    }
  }
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const CsvOptions& options) {
  const RawTable table = read_table(path, options.delimiter);
  const auto label_it = std::find(table.header.begin(), table.header.end(), label_column);
  if (label_it == table.header.end()) {
    throw std::invalid_argument(path.string() + ": no column named '" + label_column + "'");
  }
  const std::size_t label_idx = static_cast<std::size_t>(label_it - table.header.begin());

  Dataset ds;
  ds.name = path.stem().string();
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c != label_idx) ds.feature_names.push_back(table.header[c]);
  }
  if (ds.feature_names.empty()) throw std::invalid_argument(path.string() + ": no feature columns");

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  ds.features.resize(n, static_cast<Eigen::Index>(ds.feature_names.size()));
  std::map<std::string, int> class_index;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = table.rows[static_cast<std::size_t>(r)];
    Eigen::Index f = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == label_idx) continue;
      double v = 0.0;
      if (!parse_number(row[c], v)) {
        throw std::invalid_argument(path.string() + ": row " +
                                    std::to_string(table.line_numbers[static_cast<std::size_t>(r)]) +
                                    ", column '" + table.header[c] + "': " +
                                    (row[c].empty() ? "missing value" : "non-numeric value '" + row[c] + "'"));
      }
      ds.features(r, f++) = v;
    }
    const std::string& cls = row[label_idx];
    if (cls.empty()) {
      throw std::invalid_argument(path.string() + ": row " +
                                  std::to_string(table.line_numbers[static_cast<std::size_t>(r)]) +
                                  ", column '" + label_column + "': missing label");
    }
    auto [it, inserted] = class_index.try_emplace(cls, static_cast<int>(ds.class_names.size()));
    if (inserted) ds.class_names.push_back(cls);
    ds.labels.push_back(it->second);
  }
  ds.num_classes = static_cast<int>(ds.class_names.size());
  if (ds.num_classes < 2) throw std::invalid_argument(path.string() + ": need at least two classes");
  if (options.standardize) standardize_columns(ds.features);
  return ds;
}

Matrix load_points_csv(const std::filesystem::path& path, char delimiter) {
  const RawTable table = read_table(path, delimiter);
  Matrix points(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      double v = 0.0;
      if (!parse_number(table.rows[r][c], v)) {
        throw std::invalid_argument(path.string() + ": row " + std::to_string(table.line_numbers[r]) +
                                    ", column '" + table.header[c] + "': not a number");
      }
      points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return points;
}

SplitMask make_split(const Dataset& dataset, double fraction, std::uint64_t seed) {
  const std::size_t n = dataset.size();
  const auto k = static_cast<std::size_t>(dataset.num_classes);
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("make_splits: fraction must lie in (0, 1]");
  const double target = std::floor(fraction * static_cast<double>(n) + 0.5);
  if (fraction * static_cast<double>(n) < static_cast<double>(k) || target < static_cast<double>(k)) {
    throw std::invalid_argument("make_splits: fraction too small to label every class");
  }

  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(dataset.labels[i])].push_back(i);

  std::vector<std::size_t> quota(k);
  std::vector<double> remainder(k);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (members[c].empty()) throw std::invalid_argument("make_splits: empty class");
    const double ideal = fraction * static_cast<double>(members[c].size());
    quota[c] = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(ideal)), 1, members[c].size());
    remainder[c] = ideal - std::floor(ideal);
    assigned += quota[c];
  }
  std::vector<std::size_t> order(k);
  for (std::size_t c = 0; c < k; ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t c : order) {
    if (static_cast<double>(assigned) >= target) break;
    if (quota[c] < members[c].size()) {
      ++quota[c];
      ++assigned;
    }
  }

  std::mt19937_64 rng(seed);
  SplitMask mask;
  mask.fraction = fraction;
  mask.seed = seed;
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::size_t> pool = members[c];
    // Fisher-Yates with a fixed draw so masks do not depend on the standard library.
    for (std::size_t i = pool.size(); i > 1; --i) {
      std::swap(pool[i - 1], pool[rng() % i]);
    }
    mask.labeled.insert(mask.labeled.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(quota[c]));
  }
  std::sort(mask.labeled.begin(), mask.labeled.end());
  std::vector<bool> is_labeled(n, false);
  for (std::size_t i : mask.labeled) is_labeled[i] = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_labeled[i]) mask.unlabeled.push_back(i);
  }
  return mask;
}

std::vector<SplitMask> make_splits(const Dataset& dataset, double fraction,
                                   std::span<const std::uint64_t> seeds) {
  std::vector<SplitMask> out;
  out.reserve(seeds.size());
  for (std::uint64_t seed : seeds) out.push_back(make_split(dataset, fraction, seed));
  return out;
}

Matrix select_rows(const Matrix& points, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), points.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = points.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

std::vector<int> select(std::span<const int> values, std::span<const std::size_t> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(values[r]);
  return out;
}

}  // namespace otp

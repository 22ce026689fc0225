#include "entreg/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "entreg/errors.hpp"
#include "entreg/rng.hpp"
#include "entreg/text.hpp"

namespace entreg {

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

std::vector<std::vector<std::size_t>> indices_by_class(const Dataset& d) {
  std::vector<std::vector<std::size_t>> by_class(d.n_classes);
  for (std::size_t i = 0; i < d.size(); ++i) {
    by_class[static_cast<std::size_t>(d.labels[i])].push_back(i);
  }
  return by_class;
}

void require_min_class_size(const std::vector<std::vector<std::size_t>>& by_class,
                            std::size_t min_size) {
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].size() < min_size) {
      throw ClassTooSmall("class " + std::to_string(c) + " has " +
                          std::to_string(by_class[c].size()) + " samples, needs " +
                          std::to_string(min_size));
    }
  }
}

}  // namespace

Dataset make_dataset(Matrix features, std::vector<int> labels, int n_classes) {
  if (features.rows() != labels.size()) {
    throw LengthMismatch("feature rows (" + std::to_string(features.rows()) +
                         ") != labels (" + std::to_string(labels.size()) + ")");
  }
  if (n_classes < 1) throw InvalidParameter("n_classes must be >= 1");
  for (double v : features.storage()) {
    if (!std::isfinite(v)) throw InvalidParameter("features must be finite");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_classes) {
      throw LabelRangeError("label " + std::to_string(labels[i]) + " at row " +
                            std::to_string(i) + " outside [0, " +
                            std::to_string(n_classes) + ")");
    }
  }
  return Dataset{std::move(features), std::move(labels), n_classes, std::nullopt};
}

Dataset generate_synthetic(const GenSpec& spec) {
  if (spec.n_majority == 0 || spec.n_minority == 0) {
    throw InvalidParameter("gen: class counts must be positive");
  }
  if (spec.n_features < 2) throw InvalidParameter("gen: need at least 2 features");
  if (spec.n_clusters == 0) throw InvalidParameter("gen: need at least 1 cluster");
  if (!(spec.cluster_spread > 0.0)) {
    throw InvalidParameter("gen: cluster_spread must be positive");
  }
  if (spec.class_offset < 0.0) {
    throw InvalidParameter("gen: class_offset must be non-negative");
  }

  Rng rng(spec.seed);

  // Cluster centers are drawn once and shared by both classes; their spread
  // is twice the within-cluster spread, so the intra-class scatter dominates
  // the class offset.
  Matrix centers(spec.n_clusters, spec.n_features);
  for (std::size_t k = 0; k < spec.n_clusters; ++k) {
    for (std::size_t j = 0; j < spec.n_features; ++j) {
      centers(k, j) = 2.0 * spec.cluster_spread * rng.normal();
    }
  }

  // Fixed unit direction for the inter-class shift.
  std::vector<double> direction(spec.n_features);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (std::size_t j = 0; j < spec.n_features; ++j) {
      direction[j] = rng.normal();
      norm += direction[j] * direction[j];
    }
    norm = std::sqrt(norm);
  } while (norm == 0.0);
  for (std::size_t j = 0; j < spec.n_features; ++j) direction[j] /= norm;

  const std::size_t total = spec.n_majority + spec.n_minority;
  Matrix features(total, spec.n_features);
  std::vector<int> labels(total);

  std::size_t row = 0;
  for (int cls = 0; cls < 2; ++cls) {
    const std::size_t count = (cls == 0) ? spec.n_majority : spec.n_minority;
    for (std::size_t i = 0; i < count; ++i, ++row) {
      const std::size_t k = static_cast<std::size_t>(rng.below(spec.n_clusters));
      for (std::size_t j = 0; j < spec.n_features; ++j) {
        double v = centers(k, j) + spec.cluster_spread * rng.normal();
        if (cls == 1) v += spec.class_offset * direction[j];
        features(row, j) = v;
      }
      labels[row] = cls;
    }
  }
  return make_dataset(std::move(features), std::move(labels), 2);
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file: " + path.string());

  const auto header = split_csv_line(trim(line));
  if (header.size() < 2) {
    throw ParseError("header needs at least one feature column and 'label'");
  }
  if (trim(header.back()) != "label") {
    throw ParseError("final header column must be 'label', got '" +
                     std::string(trim(header.back())) + "'");
  }
  const std::size_t n_features = header.size() - 1;

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const auto trimmed = trim(line);
    if (trimmed.empty()) continue;
    ++row;
    const auto cells = split_csv_line(trimmed);
    if (cells.size() != header.size()) {
      throw ParseError(row, 0,
                       "row " + std::to_string(row) + ": expected " +
                           std::to_string(header.size()) + " columns, got " +
                           std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < n_features; ++c) {
      double v = 0.0;
      if (!try_parse_double(trim(cells[c]), v) || !std::isfinite(v)) {
        throw ParseError(row, c + 1,
                         "row " + std::to_string(row) + ", column " +
                             std::to_string(c + 1) + ": not a number: '" +
                             std::string(trim(cells[c])) + "'");
      }
      values.push_back(v);
    }
    std::int64_t lab = 0;
    if (!try_parse_i64(trim(cells.back()), lab)) {
      throw ParseError(row, header.size(),
                       "row " + std::to_string(row) + ", column " +
                           std::to_string(header.size()) + ": not an integer label: '" +
                           std::string(trim(cells.back())) + "'");
    }
    if (lab < 0) {
      throw LabelRangeError("row " + std::to_string(row) + ": negative label " +
                            std::to_string(lab));
    }
    labels.push_back(static_cast<int>(lab));
  }
  if (labels.empty()) throw ParseError("no data rows in " + path.string());

  Matrix features(labels.size(), n_features);
  features.storage() = std::move(values);
  const int n_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  return make_dataset(std::move(features), std::move(labels), n_classes);
}

void save_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t j = 0; j < d.n_features(); ++j) out << 'f' << j << ',';
  out << "label\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.n_features(); ++j) {
      out << format_double(d.features(i, j)) << ',';
    }
    out << d.labels[i] << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Dataset normalize_fit_transform(const Dataset& train) {
  if (train.size() < 2) throw InvalidParameter("normalization needs >= 2 samples");
  const std::size_t n = train.size();
  const std::size_t m = train.n_features();
  NormStats stats;
  stats.mean.assign(m, 0.0);
  stats.stddev.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) stats.mean[j] += train.features(i, j);
  }
  for (std::size_t j = 0; j < m; ++j) stats.mean[j] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = train.features(i, j) - stats.mean[j];
      stats.stddev[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    stats.stddev[j] = std::sqrt(stats.stddev[j] / static_cast<double>(n));
    // Constant features pass through shifted to zero instead of dividing by 0.
    if (stats.stddev[j] == 0.0) stats.stddev[j] = 1.0;
  }
  return apply_normalization(stats, train);
}

Dataset apply_normalization(const NormStats& stats, const Dataset& other) {
  if (stats.mean.size() != other.n_features() ||
      stats.stddev.size() != other.n_features()) {
    throw DimensionMismatch("normalization stats cover " +
                            std::to_string(stats.mean.size()) + " features, data has " +
                            std::to_string(other.n_features()));
  }
  Dataset out = other;
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = 0; j < out.n_features(); ++j) {
      out.features(i, j) = (out.features(i, j) - stats.mean[j]) / stats.stddev[j];
    }
  }
  out.normalization = stats;
  return out;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidParameter("test_fraction must lie in (0, 1)");
  }
  auto by_class = indices_by_class(d);
  require_min_class_size(by_class, 2);

  Rng rng(seed);
  for (auto& idx : by_class) rng.shuffle(idx);

  // Largest-remainder allocation: per-class floors, then hand out the
  // remaining slots by descending fractional part (ties to the lower class).
  const auto target_total = static_cast<std::size_t>(
      std::llround(static_cast<double>(d.size()) * test_fraction));
  std::vector<std::size_t> take(by_class.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t allocated = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const double quota = static_cast<double>(by_class[c].size()) * test_fraction;
    take[c] = static_cast<std::size_t>(std::floor(quota));
    allocated += take[c];
    remainders.emplace_back(quota - std::floor(quota), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; allocated < target_total && r < remainders.size(); ++r) {
    const std::size_t c = remainders[r].second;
    if (take[c] < by_class[c].size()) {
      ++take[c];
      ++allocated;
    }
  }

  std::vector<std::size_t> test_rows;
  std::vector<std::size_t> train_rows;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    for (std::size_t i = 0; i < by_class[c].size(); ++i) {
      (i < take[c] ? test_rows : train_rows).push_back(by_class[c][i]);
    }
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {take_rows(d, train_rows), take_rows(d, test_rows)};
}

FoldSplit stratified_kfold(const Dataset& d, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidParameter("k must be >= 2");
  if (static_cast<std::size_t>(k) > d.size()) {
    throw InvalidParameter("k exceeds sample count");
  }
  auto by_class = indices_by_class(d);
  require_min_class_size(by_class, 2);

  Rng rng(seed);
  FoldSplit split;
  split.k = k;
  split.fold_assignments.assign(d.size(), -1);
  // Deal each class cyclically; the rotation carries over between classes so
  // every fold is non-empty whenever k <= total samples.
  int next_fold = 0;
  for (auto& idx : by_class) {
    rng.shuffle(idx);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      split.fold_assignments[idx[i]] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  }
  return split;
}

Dataset take_rows(const Dataset& d, std::span<const std::size_t> rows) {
  Matrix features(rows.size(), d.n_features());
  std::vector<int> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= d.size()) throw InvalidParameter("row index out of range");
    const auto src = d.features.row(rows[i]);
    std::copy(src.begin(), src.end(), features.row(i).begin());
    labels[i] = d.labels[rows[i]];
  }
  Dataset out{std::move(features), std::move(labels), d.n_classes, d.normalization};
  return out;
}

std::vector<std::size_t> class_counts(const Dataset& d) {
  std::vector<std::size_t> counts(d.n_classes, 0);
  for (int lab : d.labels) ++counts[static_cast<std::size_t>(lab)];
  return counts;
}

int minority_class(const Dataset& d) {
  const auto counts = class_counts(d);
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] <= counts[best]) best = c;
  }
  return static_cast<int>(best);
}

}  // namespace entreg

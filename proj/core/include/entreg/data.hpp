#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "entreg/matrix.hpp"

namespace entreg {

/// Per-feature statistics fitted on a training split.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// Feature matrix (rows = samples) with integer labels in [0, n_classes).
/// `normalization` records the stats of the transform the features carry,
/// if any; it is set by normalize_fit_transform / apply_normalization.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  int n_classes = 0;
  std::optional<NormStats> normalization;

  std::size_t size() const noexcept { return features.rows(); }
  std::size_t n_features() const noexcept { return features.cols(); }
};

/// Validates shape, label range and finiteness; returns the dataset.
Dataset make_dataset(Matrix features, std::vector<int> labels, int n_classes);

/// Assignment of every sample to one of k folds, stratified per class.
struct FoldSplit {
  int k = 0;
  std::vector<int> fold_assignments;
};

/**
 * Generator for synthetic two-class data in the fine-grained regime: both
 * classes share the same Gaussian cluster centers (high intra-class spread),
 * and class 1 is shifted by a fixed random unit direction scaled by
 * class_offset (small inter-class gap). With class_offset < cluster_spread
 * the classes overlap heavily, which is the regime this library targets;
 * larger offsets give separable toy data.
 */
struct GenSpec {
  std::size_t n_majority = 3292;
  std::size_t n_minority = 760;
  std::size_t n_features = 8;
  std::size_t n_clusters = 4;
  double cluster_spread = 1.0;
  double class_offset = 0.35;
  std::uint64_t seed = 1;
};

Dataset generate_synthetic(const GenSpec& spec);

/// CSV with a header row whose final column is `label`; remaining columns
/// are numeric features. Throws ParseError with 1-based row/column on
/// malformed cells and LabelRangeError on negative labels.
Dataset load_csv(const std::filesystem::path& path);

/// UTF-8, comma separated, header `f0,...,label`, 17 significant digits,
/// Unix newlines. Byte-deterministic for a given dataset.
void save_csv(const Dataset& d, const std::filesystem::path& path);

/// Fits per-feature mean/std on `train` and returns the transformed copy
/// with the stats recorded. Features with zero std are shifted only.
Dataset normalize_fit_transform(const Dataset& train);

/// Applies previously fitted stats unchanged; never refits, so there is no
/// leakage from validation or test data.
Dataset apply_normalization(const NormStats& stats, const Dataset& other);

/// Per-class test counts follow largest-remainder rounding of
/// class_count * test_fraction, so totals match round(total * fraction) and
/// every class is within one sample of its exact quota. Returns
/// (train, test). Throws ClassTooSmall when any class has < 2 samples.
std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double test_fraction,
                                             std::uint64_t seed);

/// Stratified k-fold assignment: per class, shuffled samples are dealt
/// cyclically across folds (the rotation continues from class to class, so
/// all folds are hit once k <= sample count). Per-class fold counts differ
/// by at most 1.
FoldSplit stratified_kfold(const Dataset& d, int k, std::uint64_t seed);

/// Copies the selected rows (and their labels) into a new dataset.
Dataset take_rows(const Dataset& d, std::span<const std::size_t> rows);

std::vector<std::size_t> class_counts(const Dataset& d);

/// Least-frequent class; ties break toward the higher index so that in the
/// two-class balanced case the conventional positive class is 1.
int minority_class(const Dataset& d);

}  // namespace entreg

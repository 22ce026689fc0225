#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "entreg/data.hpp"
#include "entreg/model.hpp"

namespace entreg {

enum class DataSource { Synthetic, Csv };

enum class ModelSelection { MaxValF1, MinValLoss };

std::string to_string(ModelSelection rule);

/**
 * One experiment, fully specified: data source, split protocol, model shape,
 * training setup, objective, and evaluation skew. Parsed from flat
 * `section.key = value` text; unknown keys, duplicate keys, and out-of-range
 * values are rejected before any computation runs.
 */
struct ExperimentConfig {
  DataSource data_source = DataSource::Synthetic;
  GenSpec gen;
  std::filesystem::path csv_path;

  double test_fraction = 0.2;
  int k_folds = 5;
  std::uint64_t split_seed = 2;

  std::vector<std::size_t> hidden_dims = {16};

  TrainConfig train;  // train.seed defaults to 3; loss defaults to cross-entropy
  ModelSelection selection = ModelSelection::MaxValF1;

  double eval_alpha = 0.5;
  std::filesystem::path output_dir = "out";
};

ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Replaces the data, split and train seeds with streams derived from one
/// master seed (the CLI --seed override).
void apply_master_seed(ExperimentConfig& cfg, std::uint64_t master);

}  // namespace entreg

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "entreg/config.hpp"
#include "entreg/eval.hpp"
#include "entreg/model.hpp"

namespace entreg {

struct FoldOutcome {
  int fold = 0;
  double val_f1 = 0.0;
  double val_loss = 0.0;
  std::vector<double> loss_trace;
  MlpModel model;
  NormStats stats;
};

struct TrainOutcome {
  std::vector<FoldOutcome> folds;
  int selected_fold = 0;
  int positive_class = 0;
  Metrics test_metrics;
};

/**
 * The full protocol: hold out the test fraction (stratified), run stratified
 * k-fold cross-validation on the remainder with per-fold normalization
 * statistics, train one model per fold, select the best fold on validation
 * (per the configured rule), and evaluate the selected model on the test set
 * transformed with that fold's statistics.
 *
 * Validation loss is the mean per-sample objective (penalty included, L2
 * excluded). All randomness derives from the config seeds, so the outcome is
 * a pure function of the config.
 */
TrainOutcome run_train_protocol(const ExperimentConfig& cfg);

/// Loads the configured data source (generator or CSV).
Dataset load_dataset(const ExperimentConfig& cfg);

struct SweepRow {
  double alpha = 0.0;
  std::vector<double> fold_val_f1;
  double val_f1_mean = 0.0;
  double test_f1 = 0.0;
  double test_mean_entropy = 0.0;
  double test_mean_normalized_entropy = 0.0;
  double test_mean_alpha_js = 0.0;
};

/**
 * One cross-validated experiment per alpha with the loss set to the skew-JS
 * objective at that alpha (beta taken from the config when it already uses
 * that loss, 1 otherwise). Data, split and training seeds are shared across
 * rows, so fold assignments are identical and differences are attributable
 * to alpha alone. The divergence column is evaluated at each row's alpha.
 */
std::vector<SweepRow> run_alpha_sweep(const ExperimentConfig& cfg,
                                      std::span<const double> alphas);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Writes metrics.txt, model.txt, norm_stats.txt, folds.csv and one
/// fold_<i>_trace.csv per fold under `dir`, creating it if needed.
/// Byte-deterministic for a given outcome.
void write_train_artifacts(const TrainOutcome& outcome, const ExperimentConfig& cfg,
                           const std::filesystem::path& dir);

void write_norm_stats(std::ostream& out, const NormStats& stats);
NormStats load_norm_stats(const std::filesystem::path& path);

/// Desk calculator over two distributions. Divergences that do not exist
/// because of an absolute-continuity violation carry the error text instead
/// of a value.
struct DivergenceReport {
  double h_p = 0.0;
  double h_q = 0.0;
  std::optional<double> kl_pq;
  std::string kl_pq_error;
  std::optional<double> kl_qp;
  std::string kl_qp_error;
  double jsd_pq = 0.0;
  std::optional<double> alpha_js_pq;  // present when alpha was given
};

DivergenceReport divergence_report(const ProbVector& p, const ProbVector& q,
                                   std::optional<SkewParam> alpha);

/// Prints the report with 12 significant digits per value.
void print_divergence_report(std::ostream& out, const DivergenceReport& report);

/// Recomputes the configured split, pushes the test set through the model
/// (after applying `stats` when given), and projects either the penultimate
/// activations or the raw features onto the top two principal components.
Projection2D project_test_set(const ExperimentConfig& cfg, const MlpModel& model,
                              const std::optional<NormStats>& stats,
                              bool raw_features);

}  // namespace entreg

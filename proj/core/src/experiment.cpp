#include "entreg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "entreg/errors.hpp"
#include "entreg/rng.hpp"
#include "entreg/text.hpp"

namespace entreg {

namespace {

constexpr std::uint64_t kFoldSalt = 0xF01D;

std::vector<std::size_t> model_dims(const ExperimentConfig& cfg,
                                    std::size_t n_features, int n_classes) {
  std::vector<std::size_t> dims;
  dims.push_back(n_features);
  dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
  dims.push_back(static_cast<std::size_t>(n_classes));
  return dims;
}

double mean_objective(const MlpModel& m, const Dataset& d, const LossSpec& spec) {
  double sum = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    sum += loss(spec, forward(m, d.features.row(i)),
                static_cast<std::size_t>(d.labels[i]));
  }
  return sum / static_cast<double>(d.size());
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

Dataset load_dataset(const ExperimentConfig& cfg) {
  if (cfg.data_source == DataSource::Csv) {
    return load_csv(cfg.csv_path);
  }
  return generate_synthetic(cfg.gen);
}

TrainOutcome run_train_protocol(const ExperimentConfig& cfg) {
  const Dataset data = load_dataset(cfg);
  if (data.n_classes != 2) {
    throw ConfigError("the training protocol expects a 2-class dataset, got " +
                      std::to_string(data.n_classes) + " classes");
  }

  const auto [pool, test] = stratified_split(data, cfg.test_fraction, cfg.split_seed);
  const FoldSplit folds =
      stratified_kfold(pool, cfg.k_folds, derive_seed(cfg.split_seed, kFoldSalt));
  const int positive = minority_class(data);
  const auto dims = model_dims(cfg, data.n_features(), data.n_classes);

  TrainOutcome outcome;
  outcome.positive_class = positive;
  outcome.folds.reserve(cfg.k_folds);

  for (int f = 0; f < cfg.k_folds; ++f) {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> val_rows;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      (folds.fold_assignments[i] == f ? val_rows : train_rows).push_back(i);
    }
    const Dataset fold_train_raw = take_rows(pool, train_rows);
    const Dataset fold_val_raw = take_rows(pool, val_rows);

    const Dataset fold_train = normalize_fit_transform(fold_train_raw);
    const NormStats stats = *fold_train.normalization;
    const Dataset fold_val = apply_normalization(stats, fold_val_raw);

    MlpModel model = init_model(
        dims, derive_seed(cfg.train.seed, 2 * static_cast<std::uint64_t>(f)));
    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = derive_seed(cfg.train.seed, 2 * static_cast<std::uint64_t>(f) + 1);
    TrainReport report = train(std::move(model), fold_train, train_cfg);

    std::vector<int> val_pred(fold_val.size());
    for (std::size_t i = 0; i < fold_val.size(); ++i) {
      val_pred[i] =
          static_cast<int>(predict(report.model, fold_val.features.row(i)));
    }
    const Confusion conf =
        confusion_matrix(fold_val.labels, val_pred, fold_val.n_classes);

    FoldOutcome fo;
    fo.fold = f;
    fo.val_f1 = f1_score(conf, positive);
    fo.val_loss = mean_objective(report.model, fold_val, cfg.train.loss);
    fo.loss_trace = std::move(report.loss_trace);
    fo.model = std::move(report.model);
    fo.stats = stats;
    outcome.folds.push_back(std::move(fo));
  }

  int best = 0;
  for (int f = 1; f < cfg.k_folds; ++f) {
    const auto& cand = outcome.folds[f];
    const auto& incumbent = outcome.folds[best];
    const bool better = cfg.selection == ModelSelection::MaxValF1
                            ? cand.val_f1 > incumbent.val_f1
                            : cand.val_loss < incumbent.val_loss;
    if (better) best = f;
  }
  outcome.selected_fold = best;

  const FoldOutcome& sel = outcome.folds[best];
  const Dataset test_n = apply_normalization(sel.stats, test);
  std::vector<int> test_pred(test_n.size());
  std::vector<ProbVector> test_probs;
  test_probs.reserve(test_n.size());
  for (std::size_t i = 0; i < test_n.size(); ++i) {
    const auto row = test_n.features.row(i);
    test_pred[i] = static_cast<int>(predict(sel.model, row));
    test_probs.push_back(predict_proba(sel.model, row));
  }
  outcome.test_metrics =
      compute_metrics(test_n.labels, test_pred, test_probs, test_n.n_classes,
                      positive, SkewParam(cfg.eval_alpha));
  return outcome;
}

std::vector<SweepRow> run_alpha_sweep(const ExperimentConfig& cfg,
                                      std::span<const double> alphas) {
  if (alphas.empty()) throw InvalidParameter("sweep needs at least one alpha");
  double beta = 1.0;
  if (cfg.train.loss.kind() == LossKind::AlphaJS) beta = cfg.train.loss.beta();

  std::vector<SweepRow> rows;
  rows.reserve(alphas.size());
  for (double alpha : alphas) {
    ExperimentConfig run_cfg = cfg;
    run_cfg.train.loss = LossSpec::alpha_js(SkewParam(alpha), beta);
    run_cfg.eval_alpha = alpha;
    const TrainOutcome outcome = run_train_protocol(run_cfg);

    SweepRow row;
    row.alpha = alpha;
    for (const auto& fold : outcome.folds) row.fold_val_f1.push_back(fold.val_f1);
    double sum = 0.0;
    for (double v : row.fold_val_f1) sum += v;
    row.val_f1_mean = sum / static_cast<double>(row.fold_val_f1.size());
    row.test_f1 = outcome.test_metrics.f1;
    const std::size_t n = outcome.folds.front().model.output_dim();
    row.test_mean_normalized_entropy = outcome.test_metrics.mean_normalized_entropy;
    row.test_mean_entropy =
        row.test_mean_normalized_entropy * std::log(static_cast<double>(n));
    row.test_mean_alpha_js = outcome.test_metrics.mean_alpha_js_to_uniform;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw EmptyInput("no sweep rows");
  const std::size_t k = rows.front().fold_val_f1.size();
  out << "alpha";
  for (std::size_t f = 0; f < k; ++f) out << ",val_f1_fold" << f;
  out << ",val_f1_mean,test_f1,test_mean_entropy,test_mean_normalized_entropy,"
         "test_mean_alpha_js\n";
  for (const auto& row : rows) {
    if (row.fold_val_f1.size() != k) {
      throw LengthMismatch("sweep rows disagree on fold count");
    }
    out << format_double(row.alpha);
    for (double v : row.fold_val_f1) out << ',' << format_double(v);
    out << ',' << format_double(row.val_f1_mean) << ',' << format_double(row.test_f1)
        << ',' << format_double(row.test_mean_entropy) << ','
        << format_double(row.test_mean_normalized_entropy) << ','
        << format_double(row.test_mean_alpha_js) << '\n';
  }
}

void write_norm_stats(std::ostream& out, const NormStats& stats) {
  out << "mean";
  for (double v : stats.mean) out << ',' << format_double(v);
  out << "\nstd";
  for (double v : stats.stddev) out << ',' << format_double(v);
  out << '\n';
}

NormStats load_norm_stats(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  NormStats stats;
  std::string line;
  auto read_row = [&](std::string_view tag, std::vector<double>& dst) {
    if (!std::getline(in, line)) throw ParseError("stats file truncated");
    std::string_view rest = trim(line);
    const std::size_t comma = rest.find(',');
    if (comma == std::string_view::npos || rest.substr(0, comma) != tag) {
      throw ParseError("expected '" + std::string(tag) + "' row");
    }
    rest = rest.substr(comma + 1);
    while (!rest.empty()) {
      const std::size_t next = rest.find(',');
      double v = 0.0;
      if (!try_parse_double(trim(rest.substr(0, next)), v)) {
        throw ParseError("bad value in stats file");
      }
      dst.push_back(v);
      rest = next == std::string_view::npos ? std::string_view{}
                                            : rest.substr(next + 1);
    }
    if (dst.empty()) throw ParseError("empty stats row");
  };
  read_row("mean", stats.mean);
  read_row("std", stats.stddev);
  if (stats.mean.size() != stats.stddev.size()) {
    throw ParseError("stats rows differ in length");
  }
  return stats;
}

void write_train_artifacts(const TrainOutcome& outcome, const ExperimentConfig& cfg,
                           const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  {
    auto out = open_output(dir / "metrics.txt");
    out << "optimizer="
        << (std::holds_alternative<SgdMomentum>(cfg.train.optimizer)
                ? "sgd_momentum"
                : "rmsprop")
        << '\n';
    out << "model_selection=" << to_string(cfg.selection) << '\n';
    out << "selected_fold=" << outcome.selected_fold << '\n';
    const auto& sel = outcome.folds[outcome.selected_fold];
    out << "best_val_f1=" << format_double(sel.val_f1) << '\n';
    out << "best_val_loss=" << format_double(sel.val_loss) << '\n';
    write_metrics(out, outcome.test_metrics);
  }

  {
    auto out = open_output(dir / "folds.csv");
    out << "fold,val_f1,val_loss,selected\n";
    for (const auto& fold : outcome.folds) {
      out << fold.fold << ',' << format_double(fold.val_f1) << ','
          << format_double(fold.val_loss) << ','
          << (fold.fold == outcome.selected_fold ? 1 : 0) << '\n';
    }
  }

  for (const auto& fold : outcome.folds) {
    auto out = open_output(dir / ("fold_" + std::to_string(fold.fold) + "_trace.csv"));
    out << "iteration,loss\n";
    for (std::size_t i = 0; i < fold.loss_trace.size(); ++i) {
      out << i << ',' << format_double(fold.loss_trace[i]) << '\n';
    }
  }

  const auto& sel = outcome.folds[outcome.selected_fold];
  save_model(sel.model, dir / "model.txt");
  {
    auto out = open_output(dir / "norm_stats.txt");
    write_norm_stats(out, sel.stats);
  }
}

DivergenceReport divergence_report(const ProbVector& p, const ProbVector& q,
                                   std::optional<SkewParam> alpha) {
  DivergenceReport report;
  report.h_p = entropy(p);
  report.h_q = entropy(q);
  try {
    report.kl_pq = kl(p, q);
  } catch (const AbsoluteContinuityViolation& e) {
    report.kl_pq_error = e.what();
  }
  try {
    report.kl_qp = kl(q, p);
  } catch (const AbsoluteContinuityViolation& e) {
    report.kl_qp_error = e.what();
  }
  report.jsd_pq = jsd(p, q);
  if (alpha) report.alpha_js_pq = alpha_js(p, q, *alpha);
  return report;
}

void print_divergence_report(std::ostream& out, const DivergenceReport& report) {
  const int digits = 12;
  out << "H(p) = " << format_double(report.h_p, digits) << '\n';
  out << "H(q) = " << format_double(report.h_q, digits) << '\n';
  if (report.kl_pq) {
    out << "KL(p||q) = " << format_double(*report.kl_pq, digits) << '\n';
  } else {
    out << "KL(p||q) = AbsoluteContinuityViolation: " << report.kl_pq_error << '\n';
  }
  if (report.kl_qp) {
    out << "KL(q||p) = " << format_double(*report.kl_qp, digits) << '\n';
  } else {
    out << "KL(q||p) = AbsoluteContinuityViolation: " << report.kl_qp_error << '\n';
  }
  out << "JSD(p||q) = " << format_double(report.jsd_pq, digits) << '\n';
  if (report.alpha_js_pq) {
    out << "alphaJS(p||q) = " << format_double(*report.alpha_js_pq, digits) << '\n';
  }
}

Projection2D project_test_set(const ExperimentConfig& cfg, const MlpModel& model,
                              const std::optional<NormStats>& stats,
                              bool raw_features) {
  const Dataset data = load_dataset(cfg);
  auto [pool, test] = stratified_split(data, cfg.test_fraction, cfg.split_seed);
  (void)pool;
  const Dataset test_n = stats ? apply_normalization(*stats, test) : std::move(test);

  if (raw_features) {
    return pca_top2(test_n.features, test_n.labels);
  }
  if (test_n.n_features() != model.input_dim()) {
    throw DimensionMismatch("model expects " + std::to_string(model.input_dim()) +
                            " features, test set has " +
                            std::to_string(test_n.n_features()));
  }
  const std::size_t width = model.layer_dims[model.layer_dims.size() - 2];
  Matrix activations(test_n.size(), width);
  for (std::size_t i = 0; i < test_n.size(); ++i) {
    const auto act = penultimate_activations(model, test_n.features.row(i));
    std::copy(act.begin(), act.end(), activations.row(i).begin());
  }
  return pca_top2(activations, test_n.labels);
}

}  // namespace entreg

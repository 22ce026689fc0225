// Command line front end for the entreg library: synthetic data generation,
// cross-validated training, alpha sweeps, divergence queries, and PCA
// projections, all driven by a flat key=value config file.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "entreg/config.hpp"
#include "entreg/errors.hpp"
#include "entreg/experiment.hpp"
#include "entreg/text.hpp"

namespace {

using entreg::ExperimentConfig;

std::vector<double> parse_prob_list(const std::string& text, const char* name) {
  std::vector<double> values;
  std::string_view rest = text;
  std::size_t index = 0;
  while (true) {
    const std::size_t comma = rest.find(',');
    const std::string_view cell = entreg::trim(rest.substr(0, comma));
    ++index;
    double v = 0.0;
    if (!entreg::try_parse_double(cell, v)) {
      throw entreg::InvalidParameter(std::string(name) + ": entry " +
                                     std::to_string(index) + " ('" +
                                     std::string(cell) + "') is not a number");
    }
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return values;
}

ExperimentConfig load_config_or_default(const std::string& config_path,
                                        const std::string& out_dir,
                                        const std::optional<std::uint64_t>& seed) {
  ExperimentConfig cfg;
  if (!config_path.empty()) {
    cfg = entreg::load_config(config_path);
  }
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (seed) entreg::apply_master_seed(cfg, *seed);
  return cfg;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw entreg::IoError("cannot write " + path.string());
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"entropy-regularized classification experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "experiment config file (key = value lines)");
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "master seed; replaces all config seeds");

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset CSV");
  gen->fallthrough();
  std::string gen_file;
  gen->add_option("--file", gen_file, "output CSV path (default <out>/dataset.csv)");

  auto* train = app.add_subcommand("train", "run the cross-validated training protocol");
  train->fallthrough();

  auto* sweep = app.add_subcommand("sweep-alpha", "train once per skew value");
  sweep->fallthrough();
  std::string alphas_text = "0.1,0.5,0.75,0.9";
  sweep->add_option("--alphas", alphas_text, "comma list of skew values in (0,1)");

  auto* divergence = app.add_subcommand("divergence", "evaluate divergences of two distributions");
  std::string p_text;
  std::string q_text;
  std::optional<double> alpha;
  divergence->add_option("--p", p_text, "first distribution, comma separated")->required();
  divergence->add_option("--q", q_text, "second distribution, comma separated")->required();
  divergence->add_option("--alpha", alpha, "skew value for the alpha-JS divergence");

  auto* project = app.add_subcommand("project", "PCA projection of the test set");
  project->fallthrough();
  std::string model_path;
  std::string stats_path;
  bool raw_features = false;
  project->add_option("--model", model_path, "model file from a train run")->required();
  project->add_option("--stats", stats_path,
                      "normalization stats file (default: norm_stats.txt next to the model)");
  project->add_flag("--raw", raw_features, "project raw features instead of activations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0; anything else is a validation failure.
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (gen->parsed()) {
    const ExperimentConfig cfg = load_config_or_default(config_path, out_dir, seed);
    const entreg::Dataset data = entreg::generate_synthetic(cfg.gen);
    std::filesystem::path path = gen_file;
    if (path.empty()) {
      std::filesystem::create_directories(cfg.output_dir);
      path = cfg.output_dir / "dataset.csv";
    } else if (path.has_parent_path()) {
      std::filesystem::create_directories(path.parent_path());
    }
    entreg::save_csv(data, path);
    const auto counts = entreg::class_counts(data);
    std::cout << "wrote " << path.string() << " (" << data.size() << " rows)\n";
    for (std::size_t c = 0; c < counts.size(); ++c) {
      std::cout << "class " << c << ": " << counts[c] << '\n';
    }
    return 0;
  }

  if (train->parsed()) {
    const ExperimentConfig cfg = load_config_or_default(config_path, out_dir, seed);
    const entreg::TrainOutcome outcome = entreg::run_train_protocol(cfg);
    entreg::write_train_artifacts(outcome, cfg, cfg.output_dir);
    std::cout << "selected fold " << outcome.selected_fold << " (val f1 "
              << entreg::format_double(
                     outcome.folds[outcome.selected_fold].val_f1, 6)
              << ")\n";
    std::cout << "test f1 " << entreg::format_double(outcome.test_metrics.f1, 6)
              << ", accuracy "
              << entreg::format_double(outcome.test_metrics.accuracy, 6) << '\n';
    std::cout << "artifacts in " << cfg.output_dir.string() << '\n';
    return 0;
  }

  if (sweep->parsed()) {
    const ExperimentConfig cfg = load_config_or_default(config_path, out_dir, seed);
    const std::vector<double> alphas = parse_prob_list(alphas_text, "--alphas");
    for (double a : alphas) {
      if (!(a > 0.0 && a < 1.0)) {
        throw entreg::InvalidParameter("--alphas: value " +
                                       entreg::format_double(a, 6) +
                                       " outside (0, 1)");
      }
    }
    const auto rows = entreg::run_alpha_sweep(cfg, alphas);
    std::filesystem::create_directories(cfg.output_dir);
    {
      auto out = open_output(cfg.output_dir / "sweep.csv");
      entreg::write_sweep_csv(out, rows);
    }
    entreg::write_sweep_csv(std::cout, rows);
    std::cout << "wrote " << (cfg.output_dir / "sweep.csv").string() << '\n';
    return 0;
  }

  if (divergence->parsed()) {
    const entreg::ProbVector p(parse_prob_list(p_text, "--p"));
    const entreg::ProbVector q(parse_prob_list(q_text, "--q"));
    std::optional<entreg::SkewParam> skew;
    if (alpha) skew.emplace(*alpha);
    const auto report = entreg::divergence_report(p, q, skew);
    entreg::print_divergence_report(std::cout, report);
    return 0;
  }

  if (project->parsed()) {
    const ExperimentConfig cfg = load_config_or_default(config_path, out_dir, seed);
    const entreg::MlpModel model = entreg::load_model(model_path);
    std::optional<entreg::NormStats> stats;
    std::filesystem::path stats_file = stats_path;
    if (stats_file.empty()) {
      const auto sibling =
          std::filesystem::path(model_path).parent_path() / "norm_stats.txt";
      if (std::filesystem::exists(sibling)) stats_file = sibling;
    }
    if (!stats_file.empty()) stats = entreg::load_norm_stats(stats_file);

    const auto proj = entreg::project_test_set(cfg, model, stats, raw_features);
    std::filesystem::create_directories(cfg.output_dir);
    {
      auto out = open_output(cfg.output_dir / "projection.csv");
      entreg::write_projection_csv(out, proj);
    }
    std::cout << "explained variance: "
              << entreg::format_double(proj.explained_variance[0], 6) << ", "
              << entreg::format_double(proj.explained_variance[1], 6) << '\n';
    if (proj.degenerate_spectrum) {
      std::cout << "note: leading eigenvalues are nearly equal; the component "
                   "pair is an arbitrary rotation\n";
    }
    std::cout << "wrote " << (cfg.output_dir / "projection.csv").string() << '\n';
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const entreg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const entreg::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const entreg::InvalidParameter& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 1;
  } catch (const entreg::InvalidDistribution& e) {
    std::cerr << "invalid distribution: " << e.what() << '\n';
    return 1;
  } catch (const entreg::LabelRangeError& e) {
    std::cerr << "label error: " << e.what() << '\n';
    return 1;
  } catch (const entreg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

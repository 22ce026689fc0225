#include "entreg/config.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "entreg/errors.hpp"
#include "entreg/rng.hpp"
#include "entreg/text.hpp"

namespace entreg {

namespace {

struct RawConfig {
  std::map<std::string, std::string, std::less<>> entries;

  std::optional<std::string> take(std::string_view key) {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    std::string value = it->second;
    entries.erase(it);
    return value;
  }
};

RawConfig tokenize(std::string_view text) {
  RawConfig raw;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected key = value, got '" + std::string(line) + "'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    if (!raw.entries.emplace(key, value).second) {
      throw ConfigError("duplicate config key '" + key + "'");
    }
  }
  return raw;
}

double read_double(RawConfig& raw, std::string_view key, double fallback) {
  auto v = raw.take(key);
  if (!v) return fallback;
  double out = 0.0;
  if (!try_parse_double(*v, out)) {
    throw ConfigError("config key '" + std::string(key) + "' is not a number: '" +
                      *v + "'");
  }
  return out;
}

std::uint64_t read_u64(RawConfig& raw, std::string_view key, std::uint64_t fallback) {
  auto v = raw.take(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  if (!try_parse_u64(*v, out)) {
    throw ConfigError("config key '" + std::string(key) +
                      "' is not an unsigned integer: '" + *v + "'");
  }
  return out;
}

std::vector<std::size_t> read_dims(RawConfig& raw, std::string_view key,
                                   std::vector<std::size_t> fallback) {
  auto v = raw.take(key);
  if (!v) return fallback;
  std::vector<std::size_t> dims;
  std::string_view rest = *v;
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const std::string_view cell = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{}
                                           : rest.substr(comma + 1);
    std::uint64_t d = 0;
    if (!try_parse_u64(cell, d) || d == 0) {
      throw ConfigError("config key '" + std::string(key) +
                        "' must be a comma list of positive integers");
    }
    dims.push_back(static_cast<std::size_t>(d));
  }
  if (dims.empty()) {
    throw ConfigError("config key '" + std::string(key) + "' is empty");
  }
  return dims;
}

[[noreturn]] void bad_enum(std::string_view key, const std::string& value,
                           std::string_view allowed) {
  throw ConfigError("config key '" + std::string(key) + "' has unknown value '" +
                    value + "' (allowed: " + std::string(allowed) + ")");
}

void check_range(bool ok, std::string_view key, std::string_view requirement) {
  if (!ok) {
    throw ConfigError("config key '" + std::string(key) + "' out of range: " +
                      std::string(requirement));
  }
}

LossSpec read_loss(RawConfig& raw) {
  const std::string kind = raw.take("loss.kind").value_or("cross_entropy");
  const auto alpha_skew = raw.take("loss.alpha_skew");
  const auto beta = raw.take("loss.beta");
  const auto epsilon = raw.take("loss.epsilon");
  const auto gamma = raw.take("loss.gamma");
  const auto alpha_t = raw.take("loss.alpha_t");

  auto parse = [](const std::optional<std::string>& v, std::string_view key,
                  double fallback) {
    if (!v) return fallback;
    double out = 0.0;
    if (!try_parse_double(*v, out)) {
      throw ConfigError("config key '" + std::string(key) + "' is not a number: '" +
                        *v + "'");
    }
    return out;
  };
  auto reject = [&kind](const std::optional<std::string>& v, std::string_view key) {
    if (v) {
      throw ConfigError("config key '" + std::string(key) +
                        "' does not apply to loss.kind=" + kind);
    }
  };

  try {
    if (kind == "cross_entropy") {
      reject(alpha_skew, "loss.alpha_skew");
      reject(beta, "loss.beta");
      reject(epsilon, "loss.epsilon");
      reject(gamma, "loss.gamma");
      reject(alpha_t, "loss.alpha_t");
      return LossSpec::cross_entropy();
    }
    if (kind == "focal") {
      reject(alpha_skew, "loss.alpha_skew");
      reject(beta, "loss.beta");
      reject(epsilon, "loss.epsilon");
      return LossSpec::focal(parse(gamma, "loss.gamma", 2.0),
                             parse(alpha_t, "loss.alpha_t", 0.25));
    }
    if (kind == "label_smoothing") {
      reject(alpha_skew, "loss.alpha_skew");
      reject(beta, "loss.beta");
      reject(gamma, "loss.gamma");
      reject(alpha_t, "loss.alpha_t");
      return LossSpec::label_smoothing(parse(epsilon, "loss.epsilon", 0.1));
    }
    if (kind == "max_entropy") {
      reject(alpha_skew, "loss.alpha_skew");
      reject(epsilon, "loss.epsilon");
      reject(gamma, "loss.gamma");
      reject(alpha_t, "loss.alpha_t");
      return LossSpec::max_entropy(parse(beta, "loss.beta", 1.0));
    }
    if (kind == "alpha_js") {
      reject(epsilon, "loss.epsilon");
      reject(gamma, "loss.gamma");
      reject(alpha_t, "loss.alpha_t");
      if (!alpha_skew) {
        throw ConfigError("loss.kind=alpha_js requires loss.alpha_skew");
      }
      return LossSpec::alpha_js(SkewParam(parse(alpha_skew, "loss.alpha_skew", 0.0)),
                                parse(beta, "loss.beta", 1.0));
    }
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("loss configuration: ") + e.what());
  }
  bad_enum("loss.kind", kind,
           "cross_entropy, focal, label_smoothing, max_entropy, alpha_js");
}

Optimizer read_optimizer(RawConfig& raw) {
  const std::string name = raw.take("train.optimizer").value_or("rmsprop");
  const double momentum = read_double(raw, "train.momentum", 0.9);
  const double decay = read_double(raw, "train.rms_decay", 0.9);
  const double eps = read_double(raw, "train.rms_eps", 1e-8);
  if (name == "sgd_momentum") {
    check_range(momentum >= 0.0 && momentum < 1.0, "train.momentum", "[0, 1)");
    return SgdMomentum{momentum};
  }
  if (name == "rmsprop") {
    check_range(decay > 0.0 && decay < 1.0, "train.rms_decay", "(0, 1)");
    check_range(eps > 0.0, "train.rms_eps", "> 0");
    return RmsProp{decay, eps};
  }
  bad_enum("train.optimizer", name, "sgd_momentum, rmsprop");
}

}  // namespace

std::string to_string(ModelSelection rule) {
  return rule == ModelSelection::MaxValF1 ? "f1" : "loss";
}

ExperimentConfig parse_config_text(std::string_view text) {
  RawConfig raw = tokenize(text);
  ExperimentConfig cfg;

  const std::string source = raw.take("data.source").value_or("synthetic");
  if (source == "synthetic") {
    cfg.data_source = DataSource::Synthetic;
  } else if (source == "csv") {
    cfg.data_source = DataSource::Csv;
  } else {
    bad_enum("data.source", source, "synthetic, csv");
  }
  if (auto path = raw.take("data.csv_path")) {
    cfg.csv_path = *path;
  }
  if (cfg.data_source == DataSource::Csv && cfg.csv_path.empty()) {
    throw ConfigError("data.source=csv requires data.csv_path");
  }

  cfg.gen.n_majority = static_cast<std::size_t>(read_u64(raw, "data.n_majority", 3292));
  cfg.gen.n_minority = static_cast<std::size_t>(read_u64(raw, "data.n_minority", 760));
  cfg.gen.n_features = static_cast<std::size_t>(read_u64(raw, "data.n_features", 8));
  cfg.gen.n_clusters = static_cast<std::size_t>(read_u64(raw, "data.n_clusters", 4));
  cfg.gen.cluster_spread = read_double(raw, "data.cluster_spread", 1.0);
  cfg.gen.class_offset = read_double(raw, "data.class_offset", 0.35);
  cfg.gen.seed = read_u64(raw, "data.seed", 1);
  check_range(cfg.gen.n_majority > 0, "data.n_majority", "> 0");
  check_range(cfg.gen.n_minority > 0, "data.n_minority", "> 0");
  check_range(cfg.gen.n_features >= 2, "data.n_features", ">= 2");
  check_range(cfg.gen.n_clusters >= 1, "data.n_clusters", ">= 1");
  check_range(cfg.gen.cluster_spread > 0.0, "data.cluster_spread", "> 0");
  check_range(cfg.gen.class_offset >= 0.0, "data.class_offset", ">= 0");

  cfg.test_fraction = read_double(raw, "split.test_fraction", 0.2);
  check_range(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0,
              "split.test_fraction", "(0, 1)");
  cfg.k_folds = static_cast<int>(read_u64(raw, "split.k", 5));
  check_range(cfg.k_folds >= 2, "split.k", ">= 2");
  cfg.split_seed = read_u64(raw, "split.seed", 2);

  cfg.hidden_dims = read_dims(raw, "model.hidden_dims", {16});

  cfg.train.loss = read_loss(raw);
  cfg.train.learning_rate = read_double(raw, "train.learning_rate", 1e-4);
  check_range(cfg.train.learning_rate >= 0.0, "train.learning_rate", ">= 0");
  cfg.train.iterations =
      static_cast<std::size_t>(read_u64(raw, "train.iterations", 5000));
  check_range(cfg.train.iterations >= 1, "train.iterations", ">= 1");
  cfg.train.batch_size =
      static_cast<std::size_t>(read_u64(raw, "train.batch_size", 64));
  check_range(cfg.train.batch_size >= 1, "train.batch_size", ">= 1");
  cfg.train.l2_lambda = read_double(raw, "train.l2_lambda", 1e-4);
  check_range(cfg.train.l2_lambda >= 0.0, "train.l2_lambda", ">= 0");
  cfg.train.optimizer = read_optimizer(raw);
  cfg.train.seed = read_u64(raw, "train.seed", 3);

  const std::string rule = raw.take("train.model_selection").value_or("f1");
  if (rule == "f1") {
    cfg.selection = ModelSelection::MaxValF1;
  } else if (rule == "loss") {
    cfg.selection = ModelSelection::MinValLoss;
  } else {
    bad_enum("train.model_selection", rule, "f1, loss");
  }

  cfg.eval_alpha = read_double(raw, "eval.alpha", 0.5);
  check_range(cfg.eval_alpha > 0.0 && cfg.eval_alpha < 1.0, "eval.alpha", "(0, 1)");

  if (auto dir = raw.take("output.dir")) {
    if (dir->empty()) throw ConfigError("output.dir must not be empty");
    cfg.output_dir = *dir;
  }

  if (!raw.entries.empty()) {
    throw ConfigError("unknown config key '" + raw.entries.begin()->first + "'");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void apply_master_seed(ExperimentConfig& cfg, std::uint64_t master) {
  cfg.gen.seed = derive_seed(master, 1);
  cfg.split_seed = derive_seed(master, 2);
  cfg.train.seed = derive_seed(master, 3);
}

}  // namespace entreg

#include "entreg/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "entreg/errors.hpp"
#include "entreg/rng.hpp"
#include "entreg/text.hpp"

namespace entreg {

namespace {

void check_architecture(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2) {
    throw InvalidArchitecture("need at least input and output dims, got " +
                              std::to_string(dims.size()));
  }
  for (std::size_t d : dims) {
    if (d == 0) throw InvalidArchitecture("layer dims must be positive");
  }
  if (dims.back() < 2) {
    throw InvalidArchitecture("output dim must be >= 2 for classification");
  }
}

void check_input(const MlpModel& m, std::size_t len) {
  if (len != m.input_dim()) {
    throw DimensionMismatch("input has " + std::to_string(len) +
                            " features, model expects " +
                            std::to_string(m.input_dim()));
  }
}

// Forward pass keeping pre-activations and activations for backprop.
struct ForwardTrace {
  std::vector<std::vector<double>> pre;   // per layer, length dims[l+1]
  std::vector<std::vector<double>> post;  // post[0] = input copy
};

ForwardTrace forward_trace(const MlpModel& m, std::span<const double> x) {
  ForwardTrace t;
  t.post.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    const Matrix& w = m.weights[l];
    const auto& b = m.biases[l];
    std::vector<double> z(w.rows());
    for (std::size_t r = 0; r < w.rows(); ++r) {
      double acc = b[r];
      const auto& a = t.post.back();
      for (std::size_t c = 0; c < w.cols(); ++c) acc += w(r, c) * a[c];
      z[r] = acc;
    }
    t.pre.push_back(z);
    if (l + 1 < m.num_layers()) {
      for (double& v : z) v = std::max(v, 0.0);
    }
    t.post.push_back(std::move(z));
  }
  return t;
}

ParamGradients zero_gradients(const MlpModel& m) {
  ParamGradients g;
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    g.weights.emplace_back(m.weights[l].rows(), m.weights[l].cols());
    g.biases.emplace_back(m.biases[l].size(), 0.0);
  }
  return g;
}

}  // namespace

MlpModel init_model(const std::vector<std::size_t>& layer_dims, std::uint64_t seed) {
  check_architecture(layer_dims);
  MlpModel m;
  m.layer_dims = layer_dims;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const std::size_t fan_in = layer_dims[l];
    const std::size_t fan_out = layer_dims[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_out, fan_in);
    for (std::size_t r = 0; r < fan_out; ++r) {
      for (std::size_t c = 0; c < fan_in; ++c) {
        w(r, c) = rng.uniform(-bound, bound);
      }
    }
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(fan_out, 0.0);
  }
  return m;
}

Logits forward(const MlpModel& m, std::span<const double> x) {
  check_input(m, x.size());
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    const Matrix& w = m.weights[l];
    std::vector<double> z(w.rows());
    for (std::size_t r = 0; r < w.rows(); ++r) {
      double acc = m.biases[l][r];
      for (std::size_t c = 0; c < w.cols(); ++c) acc += w(r, c) * a[c];
      z[r] = acc;
    }
    if (l + 1 < m.num_layers()) {
      for (double& v : z) v = std::max(v, 0.0);
    }
    a = std::move(z);
  }
  return Logits(std::move(a));
}

std::vector<double> penultimate_activations(const MlpModel& m,
                                            std::span<const double> x) {
  check_input(m, x.size());
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t l = 0; l + 1 < m.num_layers(); ++l) {
    const Matrix& w = m.weights[l];
    std::vector<double> z(w.rows());
    for (std::size_t r = 0; r < w.rows(); ++r) {
      double acc = m.biases[l][r];
      for (std::size_t c = 0; c < w.cols(); ++c) acc += w(r, c) * a[c];
      z[r] = std::max(acc, 0.0);
    }
    a = std::move(z);
  }
  return a;
}

ProbVector predict_proba(const MlpModel& m, std::span<const double> x) {
  return softmax(forward(m, x));
}

std::size_t predict(const MlpModel& m, std::span<const double> x) {
  const Logits z = forward(m, x);
  std::size_t best = 0;
  for (std::size_t i = 1; i < z.size(); ++i) {
    if (z[i] > z[best]) best = i;
  }
  return best;
}

std::pair<double, ParamGradients> batch_loss_gradients(
    const MlpModel& m, const Matrix& features, std::span<const int> labels,
    std::span<const std::size_t> rows, const LossSpec& spec, double l2_lambda) {
  if (rows.empty()) throw EmptyInput("batch is empty");
  if (features.rows() != labels.size()) {
    throw LengthMismatch("features/labels row mismatch");
  }
  check_input(m, features.cols());

  ParamGradients grads = zero_gradients(m);
  double total_loss = 0.0;
  const std::size_t layers = m.num_layers();

  for (std::size_t row : rows) {
    const ForwardTrace trace = forward_trace(m, features.row(row));
    // Diverged parameters surface as a NaN objective rather than an
    // exception from the logits validation; train() turns that into
    // NonFiniteLoss with the iteration index.
    bool finite = true;
    for (double v : trace.post.back()) {
      if (!std::isfinite(v)) finite = false;
    }
    if (!finite) {
      return {std::numeric_limits<double>::quiet_NaN(), std::move(grads)};
    }
    const Logits logits(std::vector<double>(trace.post.back()));
    const auto label = static_cast<std::size_t>(labels[row]);
    total_loss += loss(spec, logits, label);

    std::vector<double> delta = loss_gradient(spec, logits, label);
    for (std::size_t l = layers; l-- > 0;) {
      Matrix& dw = grads.weights[l];
      auto& db = grads.biases[l];
      const auto& a_in = trace.post[l];
      for (std::size_t r = 0; r < dw.rows(); ++r) {
        db[r] += delta[r];
        for (std::size_t c = 0; c < dw.cols(); ++c) {
          dw(r, c) += delta[r] * a_in[c];
        }
      }
      if (l > 0) {
        const Matrix& w = m.weights[l];
        std::vector<double> prev(w.cols(), 0.0);
        for (std::size_t c = 0; c < w.cols(); ++c) {
          if (trace.pre[l - 1][c] > 0.0) {
            double acc = 0.0;
            for (std::size_t r = 0; r < w.rows(); ++r) acc += w(r, c) * delta[r];
            prev[c] = acc;
          }
        }
        delta = std::move(prev);
      }
    }
  }

  const double inv_batch = 1.0 / static_cast<double>(rows.size());
  double l2_term = 0.0;
  for (std::size_t l = 0; l < layers; ++l) {
    for (auto& v : grads.weights[l].storage()) v *= inv_batch;
    for (auto& v : grads.biases[l]) v *= inv_batch;
    if (l2_lambda > 0.0) {
      auto& dw = grads.weights[l].storage();
      const auto& w = m.weights[l].storage();
      for (std::size_t i = 0; i < w.size(); ++i) {
        l2_term += w[i] * w[i];
        dw[i] += 2.0 * l2_lambda * w[i];
      }
    }
  }
  return {total_loss * inv_batch + l2_lambda * l2_term, std::move(grads)};
}

TrainReport train(MlpModel m, const Dataset& data, const TrainConfig& cfg) {
  if (data.size() == 0) throw EmptyInput("training data is empty");
  check_input(m, data.n_features());
  if (data.n_classes > static_cast<int>(m.output_dim())) {
    throw DimensionMismatch("dataset has " + std::to_string(data.n_classes) +
                            " classes, model outputs " +
                            std::to_string(m.output_dim()));
  }
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw InvalidParameter("learning_rate must be finite and >= 0");
  }
  if (cfg.iterations == 0) throw InvalidParameter("iterations must be positive");
  if (cfg.batch_size == 0) throw InvalidParameter("batch_size must be positive");
  if (!(cfg.l2_lambda >= 0.0)) throw InvalidParameter("l2_lambda must be >= 0");
  if (const auto* sgd = std::get_if<SgdMomentum>(&cfg.optimizer)) {
    if (!(sgd->momentum >= 0.0 && sgd->momentum < 1.0)) {
      throw InvalidParameter("momentum must lie in [0, 1)");
    }
  } else if (const auto* rms = std::get_if<RmsProp>(&cfg.optimizer)) {
    if (!(rms->decay > 0.0 && rms->decay < 1.0)) {
      throw InvalidParameter("rms decay must lie in (0, 1)");
    }
    if (!(rms->eps > 0.0)) throw InvalidParameter("rms eps must be positive");
  }

  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();  // forces a shuffle on the first iteration

  ParamGradients velocity = [&] {
    ParamGradients g;
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
      g.weights.emplace_back(m.weights[l].rows(), m.weights[l].cols());
      g.biases.emplace_back(m.biases[l].size(), 0.0);
    }
    return g;
  }();

  TrainReport report;
  report.seed = cfg.seed;
  report.loss_trace.reserve(cfg.iterations);

  for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
    if (cursor >= order.size()) {
      rng.shuffle(order);
      cursor = 0;
    }
    const std::size_t take = std::min(cfg.batch_size, order.size() - cursor);
    std::span<const std::size_t> batch(order.data() + cursor, take);
    cursor += take;

    auto [batch_loss, grads] =
        batch_loss_gradients(m, data.features, data.labels, batch, cfg.loss,
                             cfg.l2_lambda);
    report.loss_trace.push_back(batch_loss);
    if (!std::isfinite(batch_loss)) {
      throw NonFiniteLoss(iter, "non-finite loss at iteration " +
                                    std::to_string(iter));
    }

    if (const auto* sgd = std::get_if<SgdMomentum>(&cfg.optimizer)) {
      for (std::size_t l = 0; l < m.num_layers(); ++l) {
        auto& v = velocity.weights[l].storage();
        auto& g = grads.weights[l].storage();
        auto& w = m.weights[l].storage();
        for (std::size_t i = 0; i < w.size(); ++i) {
          v[i] = sgd->momentum * v[i] + g[i];
          w[i] -= cfg.learning_rate * v[i];
        }
        auto& vb = velocity.biases[l];
        auto& gb = grads.biases[l];
        auto& b = m.biases[l];
        for (std::size_t i = 0; i < b.size(); ++i) {
          vb[i] = sgd->momentum * vb[i] + gb[i];
          b[i] -= cfg.learning_rate * vb[i];
        }
      }
    } else {
      const auto& rms = std::get<RmsProp>(cfg.optimizer);
      for (std::size_t l = 0; l < m.num_layers(); ++l) {
        auto& s = velocity.weights[l].storage();
        auto& g = grads.weights[l].storage();
        auto& w = m.weights[l].storage();
        for (std::size_t i = 0; i < w.size(); ++i) {
          s[i] = rms.decay * s[i] + (1.0 - rms.decay) * g[i] * g[i];
          w[i] -= cfg.learning_rate * g[i] / (std::sqrt(s[i]) + rms.eps);
        }
        auto& sb = velocity.biases[l];
        auto& gb = grads.biases[l];
        auto& b = m.biases[l];
        for (std::size_t i = 0; i < b.size(); ++i) {
          sb[i] = rms.decay * sb[i] + (1.0 - rms.decay) * gb[i] * gb[i];
          b[i] -= cfg.learning_rate * gb[i] / (std::sqrt(sb[i]) + rms.eps);
        }
      }
    }
  }

  report.model = std::move(m);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

std::string model_to_text(const MlpModel& m) {
  std::ostringstream out;
  for (std::size_t i = 0; i < m.layer_dims.size(); ++i) {
    if (i) out << ' ';
    out << m.layer_dims[i];
  }
  out << '\n';
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    for (double v : m.weights[l].storage()) out << format_double(v) << '\n';
    for (double v : m.biases[l]) out << format_double(v) << '\n';
  }
  return out.str();
}

MlpModel model_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw ParseError("model text is empty");

  std::vector<std::size_t> dims;
  std::istringstream hs(header);
  std::string token;
  while (hs >> token) {
    std::uint64_t d = 0;
    if (!try_parse_u64(token, d)) {
      throw ParseError("bad layer dim '" + token + "'");
    }
    dims.push_back(static_cast<std::size_t>(d));
  }
  check_architecture(dims);

  MlpModel m;
  m.layer_dims = dims;
  std::string line;
  auto next_value = [&](double& v) {
    if (!std::getline(in, line)) throw ParseError("model text truncated");
    if (!try_parse_double(trim(line), v) || !std::isfinite(v)) {
      throw ParseError("bad parameter value '" + line + "'");
    }
  };
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Matrix w(dims[l + 1], dims[l]);
    for (auto& v : w.storage()) next_value(v);
    std::vector<double> b(dims[l + 1]);
    for (auto& v : b) next_value(v);
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::move(b));
  }
  if (std::getline(in, line) && !trim(line).empty()) {
    throw ParseError("trailing content after model parameters");
  }
  return m;
}

void save_model(const MlpModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << model_to_text(m);
  if (!out) throw IoError("write failed: " + path.string());
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_text(buf.str());
}

}  // namespace entreg

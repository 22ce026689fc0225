#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "entreg/data.hpp"
#include "entreg/losses.hpp"
#include "entreg/matrix.hpp"

namespace entreg {

/// v <- momentum * v + g;  w <- w - lr * v
struct SgdMomentum {
  double momentum = 0.9;
};

/// s <- decay * s + (1-decay) * g^2;  w <- w - lr * g / (sqrt(s) + eps)
struct RmsProp {
  double decay = 0.9;
  double eps = 1e-8;
};

using Optimizer = std::variant<SgdMomentum, RmsProp>;

/**
 * Small feedforward classifier: affine layers with rectifier activations on
 * the hidden layers and raw logits at the output. weights[l] has shape
 * layer_dims[l+1] x layer_dims[l].
 */
struct MlpModel {
  std::vector<std::size_t> layer_dims;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  std::size_t input_dim() const noexcept { return layer_dims.front(); }
  std::size_t output_dim() const noexcept { return layer_dims.back(); }
  std::size_t num_layers() const noexcept { return weights.size(); }
};

struct TrainConfig {
  LossSpec loss = LossSpec::cross_entropy();
  double learning_rate = 1e-4;
  std::size_t iterations = 5000;
  std::size_t batch_size = 64;
  double l2_lambda = 0.0;
  Optimizer optimizer = SgdMomentum{};
  std::uint64_t seed = 0;
};

struct TrainReport {
  std::vector<double> loss_trace;  // one entry per iteration, pre-update
  MlpModel model;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

/// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out))), zero biases.
/// Bit-identical for a given seed.
MlpModel init_model(const std::vector<std::size_t>& layer_dims, std::uint64_t seed);

Logits forward(const MlpModel& m, std::span<const double> x);

/// Activations feeding the final linear layer (the input itself when the
/// model has a single layer). Used for feature-space projections.
std::vector<double> penultimate_activations(const MlpModel& m, std::span<const double> x);

ProbVector predict_proba(const MlpModel& m, std::span<const double> x);

/// Argmax of the logits; ties break toward the lowest class index.
std::size_t predict(const MlpModel& m, std::span<const double> x);

struct ParamGradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

/// Mean loss over the given rows plus l2_lambda * sum ||W||^2 (weights only,
/// not biases), together with its gradient in every parameter.
std::pair<double, ParamGradients> batch_loss_gradients(
    const MlpModel& m, const Matrix& features, std::span<const int> labels,
    std::span<const std::size_t> rows, const LossSpec& spec, double l2_lambda);

/**
 * Minibatch training. Sample order is reshuffled with the config seed at
 * every epoch boundary; the loss trace records the batch objective before
 * each update. Throws NonFiniteLoss (with the iteration index) as soon as
 * the objective stops being finite. Fully deterministic in (model, data,
 * config).
 */
TrainReport train(MlpModel m, const Dataset& data, const TrainConfig& cfg);

/// Text serialization: one header line with the layer dims, then all weight
/// (row-major) and bias values, one per line, 17 significant digits.
std::string model_to_text(const MlpModel& m);
MlpModel model_from_text(const std::string& text);
void save_model(const MlpModel& m, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace entreg

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "entreg/prob.hpp"

namespace entreg {

enum class LossKind {
  CrossEntropy,
  Focal,
  LabelSmoothing,
  MaxEntropy,
  AlphaJS,
};

std::string to_string(LossKind kind);

/**
 * Tagged configuration selecting one training objective together with the
 * hyperparameters that apply to it. Construct through the named factories;
 * accessors for hyperparameters that do not belong to the selected kind
 * throw InvalidParameter.
 */
class LossSpec {
 public:
  static LossSpec cross_entropy();
  static LossSpec focal(double gamma, double alpha_t);
  static LossSpec label_smoothing(double epsilon);
  static LossSpec max_entropy(double beta);
  static LossSpec alpha_js(SkewParam alpha_skew, double beta);

  LossKind kind() const noexcept { return kind_; }
  double gamma() const;       // Focal
  double alpha_t() const;     // Focal
  double epsilon() const;     // LabelSmoothing
  double beta() const;        // MaxEntropy, AlphaJS
  double alpha_skew() const;  // AlphaJS

 private:
  explicit LossSpec(LossKind kind) : kind_(kind) {}
  void require(LossKind kind, const char* param) const;

  LossKind kind_;
  double gamma_ = 0.0;
  double alpha_t_ = 0.0;
  double epsilon_ = 0.0;
  double beta_ = 0.0;
  double alpha_skew_ = 0.0;
};

/// Pre-softmax classifier scores; entries must be finite, length >= 2.
class Logits {
 public:
  explicit Logits(std::vector<double> values);
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

/**
 * Numerically stable softmax: subtracts the max before exponentiating, then
 * floors every probability at 1e-12 and renormalizes. The floor is the one
 * place in the library that clamps, so downstream losses and divergences can
 * assume strictly positive model distributions.
 */
ProbVector softmax(const Logits& z);

/// Focal loss -alpha_t (1 - p_t)^gamma ln(p_t) with p_t = p[label].
double focal_loss(const ProbVector& p, std::size_t label, double gamma, double alpha_t);

/// (1-eps) H(y, p) + eps H(u, p) with y one-hot on label, u uniform.
double label_smoothing_loss(const ProbVector& p, std::size_t label, double epsilon);

/// KL(y || p) - beta H(p); with one-hot y the first term is -ln p[label].
double max_entropy_loss(const ProbVector& p, std::size_t label, double beta);

/// H(y, p) + beta * J^s_a(u || p): cross-entropy plus the scaled skew-JS
/// divergence from the uniform distribution (uniform first; the divergence
/// is asymmetric, so the order matters).
double alpha_js_loss(const ProbVector& p, std::size_t label, SkewParam a, double beta);

/// Softmax followed by the objective selected by `spec`.
double loss(const LossSpec& spec, const Logits& z, std::size_t label);

/// Analytical gradient of `loss` with respect to the logits.
std::vector<double> loss_gradient(const LossSpec& spec, const Logits& z,
                                  std::size_t label);

}  // namespace entreg

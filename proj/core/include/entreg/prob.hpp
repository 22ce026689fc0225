#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "entreg/errors.hpp"

namespace entreg {

/**
 * Finite discrete probability distribution over n >= 2 classes.
 *
 * Entries are validated at construction: non-negative, finite, and summing
 * to 1 within 1e-9. Values are immutable afterwards, so instances are safe
 * to share across threads.
 */
class ProbVector {
 public:
  explicit ProbVector(std::vector<double> probs);

  static ProbVector uniform(std::size_t n);
  static ProbVector one_hot(std::size_t n, std::size_t hot_index);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const noexcept { return probs_[i]; }
  std::span<const double> values() const noexcept { return probs_; }

  bool strictly_positive() const noexcept;

 private:
  std::vector<double> probs_;
};

/// Skew parameter alpha, restricted to the open interval (0, 1). The scaled
/// divergence below is singular at the endpoints; the endpoint behaviours are
/// exposed as separate losses instead.
class SkewParam {
 public:
  explicit SkewParam(double alpha);
  double value() const noexcept { return alpha_; }

 private:
  double alpha_;
};

/// Shannon entropy -sum p_i ln p_i in nats, with 0 ln 0 taken as 0.
/// Result lies in [0, ln n].
double entropy(const ProbVector& p);

/// Cross-entropy -sum target_i ln p_i in nats. For a one-hot target on class
/// k this is -ln p_k. Throws AbsoluteContinuityViolation when target_i > 0
/// meets p_i = 0.
double cross_entropy(const ProbVector& target, const ProbVector& p);

/// Kullback-Leibler divergence sum p_i ln(p_i / q_i) in nats; terms with
/// p_i = 0 contribute 0. Throws AbsoluteContinuityViolation when p_i > 0
/// meets q_i = 0.
double kl(const ProbVector& p, const ProbVector& q);

/// Jensen-Shannon divergence: the average of the two KL divergences to the
/// midpoint mixture. Always finite, in [0, ln 2], symmetric in (p, q).
double jsd(const ProbVector& p, const ProbVector& q);

/// Skewed mixture (1-a) p + a q.
ProbVector mixture(const ProbVector& p, const ProbVector& q, SkewParam a);

/**
 * Scaled alpha-skew Jensen-Shannon divergence, KL-sum form:
 *
 *   (1/(a(1-a))) [ (1-a) KL(p || m) + a KL(q || m) ],  m = (1-a) p + a q.
 *
 * Non-negative; zero exactly when p = q. Asymmetric in (p, q) for a != 1/2.
 * At a = 1/2 equals 4 * jsd(p, q).
 */
double alpha_js(const ProbVector& p, const ProbVector& q, SkewParam a);

/**
 * Same quantity through the entropy closed form:
 *
 *   (1/(a(1-a))) [ H((1-a) p + a q) - (1-a) H(p) - a H(q) ].
 *
 * Agrees with alpha_js to tight floating-point tolerance; kept as a distinct
 * code path so the two can cross-check each other.
 */
double alpha_js_entropy_form(const ProbVector& p, const ProbVector& q, SkewParam a);

}  // namespace entreg

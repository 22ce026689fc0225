#include "entreg/prob.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace entreg {

namespace {

constexpr double kSumTolerance = 1e-9;

void check_same_size(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) {
    throw DimensionMismatch("probability vectors have sizes " +
                            std::to_string(p.size()) + " and " +
                            std::to_string(q.size()));
  }
}

}  // namespace

ProbVector::ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) {
    throw InvalidDistribution("need at least 2 classes, got " +
                              std::to_string(probs_.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double v = probs_[i];
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidDistribution("entry " + std::to_string(i) +
                                " is negative or non-finite");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw InvalidDistribution("entries sum to " + std::to_string(sum) +
                              ", expected 1");
  }
}

ProbVector ProbVector::uniform(std::size_t n) {
  return ProbVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ProbVector ProbVector::one_hot(std::size_t n, std::size_t hot_index) {
  if (hot_index >= n) {
    throw InvalidParameter("one_hot index " + std::to_string(hot_index) +
                           " out of range for n=" + std::to_string(n));
  }
  std::vector<double> v(n, 0.0);
  v[hot_index] = 1.0;
  return ProbVector(std::move(v));
}

bool ProbVector::strictly_positive() const noexcept {
  for (double v : probs_) {
    if (v <= 0.0) return false;
  }
  return true;
}

SkewParam::SkewParam(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw InvalidParameter("skew parameter must lie strictly inside (0, 1), got " +
                           std::to_string(alpha));
  }
}

double entropy(const ProbVector& p) {
  double h = 0.0;
  for (double v : p.values()) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

double cross_entropy(const ProbVector& target, const ProbVector& p) {
  check_same_size(target, p);
  double ce = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double t = target[i];
    if (t == 0.0) continue;
    if (p[i] == 0.0) {
      throw AbsoluteContinuityViolation(
          "cross_entropy: target has mass at index " + std::to_string(i) +
          " where p is zero");
    }
    ce -= t * std::log(p[i]);
  }
  return ce;
}

double kl(const ProbVector& p, const ProbVector& q) {
  check_same_size(p, q);
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    if (pi == 0.0) continue;
    if (q[i] == 0.0) {
      throw AbsoluteContinuityViolation("kl: p has mass at index " +
                                        std::to_string(i) + " where q is zero");
    }
    d += pi * std::log(pi / q[i]);
  }
  return d;
}

double jsd(const ProbVector& p, const ProbVector& q) {
  check_same_size(p, q);
  // The midpoint mixture covers the support of both arguments, so both KL
  // terms are finite by construction.
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) d += 0.5 * p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) d += 0.5 * q[i] * std::log(q[i] / m);
  }
  return d;
}

ProbVector mixture(const ProbVector& p, const ProbVector& q, SkewParam a) {
  check_same_size(p, q);
  const double alpha = a.value();
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = (1.0 - alpha) * p[i] + alpha * q[i];
  }
  return ProbVector(std::move(m));
}

double alpha_js(const ProbVector& p, const ProbVector& q, SkewParam a) {
  check_same_size(p, q);
  const double alpha = a.value();
  // Inline the two KL terms against the mixture. A zero mixture coordinate
  // requires p_i = q_i = 0, and then both terms vanish.
  double kl_p = 0.0;
  double kl_q = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = (1.0 - alpha) * p[i] + alpha * q[i];
    if (p[i] > 0.0) kl_p += p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) kl_q += q[i] * std::log(q[i] / m);
  }
  return ((1.0 - alpha) * kl_p + alpha * kl_q) / (alpha * (1.0 - alpha));
}

double alpha_js_entropy_form(const ProbVector& p, const ProbVector& q, SkewParam a) {
  check_same_size(p, q);
  const double alpha = a.value();
  double h_mix = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = (1.0 - alpha) * p[i] + alpha * q[i];
    if (m > 0.0) h_mix -= m * std::log(m);
  }
  const double val = h_mix - (1.0 - alpha) * entropy(p) - alpha * entropy(q);
  return val / (alpha * (1.0 - alpha));
}

}  // namespace entreg

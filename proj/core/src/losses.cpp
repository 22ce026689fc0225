#include "entreg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace entreg {

namespace {

constexpr double kProbFloor = 1e-12;

void check_label(std::size_t label, std::size_t n) {
  if (label >= n) {
    throw InvalidParameter("label " + std::to_string(label) +
                           " out of range for " + std::to_string(n) + " classes");
  }
}

void require_strictly_positive(const ProbVector& p) {
  if (!p.strictly_positive()) {
    throw InvalidDistribution("loss requires a strictly positive distribution");
  }
}

}  // namespace

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::CrossEntropy: return "cross_entropy";
    case LossKind::Focal: return "focal";
    case LossKind::LabelSmoothing: return "label_smoothing";
    case LossKind::MaxEntropy: return "max_entropy";
    case LossKind::AlphaJS: return "alpha_js";
  }
  return "unknown";
}

LossSpec LossSpec::cross_entropy() { return LossSpec(LossKind::CrossEntropy); }

LossSpec LossSpec::focal(double gamma, double alpha_t) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidParameter("focal gamma must be >= 0");
  }
  if (!(alpha_t >= 0.0 && alpha_t <= 1.0)) {
    throw InvalidParameter("focal alpha_t must lie in [0, 1]");
  }
  LossSpec s(LossKind::Focal);
  s.gamma_ = gamma;
  s.alpha_t_ = alpha_t;
  return s;
}

LossSpec LossSpec::label_smoothing(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw InvalidParameter("label smoothing epsilon must lie in [0, 1]");
  }
  LossSpec s(LossKind::LabelSmoothing);
  s.epsilon_ = epsilon;
  return s;
}

LossSpec LossSpec::max_entropy(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw InvalidParameter("max entropy beta must be >= 0");
  }
  LossSpec s(LossKind::MaxEntropy);
  s.beta_ = beta;
  return s;
}

LossSpec LossSpec::alpha_js(SkewParam alpha_skew, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw InvalidParameter("alpha_js beta must be >= 0");
  }
  LossSpec s(LossKind::AlphaJS);
  s.alpha_skew_ = alpha_skew.value();
  s.beta_ = beta;
  return s;
}

void LossSpec::require(LossKind kind, const char* param) const {
  if (kind_ != kind) {
    throw InvalidParameter(std::string(param) + " is not a hyperparameter of " +
                           to_string(kind_));
  }
}

double LossSpec::gamma() const {
  require(LossKind::Focal, "gamma");
  return gamma_;
}

double LossSpec::alpha_t() const {
  require(LossKind::Focal, "alpha_t");
  return alpha_t_;
}

double LossSpec::epsilon() const {
  require(LossKind::LabelSmoothing, "epsilon");
  return epsilon_;
}

double LossSpec::beta() const {
  if (kind_ != LossKind::MaxEntropy && kind_ != LossKind::AlphaJS) {
    throw InvalidParameter("beta is not a hyperparameter of " + to_string(kind_));
  }
  return beta_;
}

double LossSpec::alpha_skew() const {
  require(LossKind::AlphaJS, "alpha_skew");
  return alpha_skew_;
}

Logits::Logits(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw InvalidParameter("logits need at least 2 entries");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidParameter("logits must be finite");
  }
}

ProbVector softmax(const Logits& z) {
  const std::size_t n = z.size();
  const double zmax = *std::max_element(z.values().begin(), z.values().end());
  std::vector<double> p(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = std::exp(z[i] - zmax);
    sum += p[i];
  }
  double floored_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = std::max(p[i] / sum, kProbFloor);
    floored_sum += p[i];
  }
  for (std::size_t i = 0; i < n; ++i) p[i] /= floored_sum;
  return ProbVector(std::move(p));
}

double focal_loss(const ProbVector& p, std::size_t label, double gamma,
                  double alpha_t) {
  check_label(label, p.size());
  require_strictly_positive(p);
  const double pt = p[label];
  return -alpha_t * std::pow(1.0 - pt, gamma) * std::log(pt);
}

double label_smoothing_loss(const ProbVector& p, std::size_t label, double epsilon) {
  check_label(label, p.size());
  require_strictly_positive(p);
  const double n = static_cast<double>(p.size());
  double sum_log = 0.0;
  for (double v : p.values()) sum_log += std::log(v);
  const double h_y = -std::log(p[label]);
  const double h_u = -sum_log / n;
  return (1.0 - epsilon) * h_y + epsilon * h_u;
}

double max_entropy_loss(const ProbVector& p, std::size_t label, double beta) {
  check_label(label, p.size());
  require_strictly_positive(p);
  return -std::log(p[label]) - beta * entropy(p);
}

double alpha_js_loss(const ProbVector& p, std::size_t label, SkewParam a,
                     double beta) {
  check_label(label, p.size());
  require_strictly_positive(p);
  const ProbVector u = ProbVector::uniform(p.size());
  return -std::log(p[label]) + beta * alpha_js(u, p, a);
}

double loss(const LossSpec& spec, const Logits& z, std::size_t label) {
  const ProbVector p = softmax(z);
  switch (spec.kind()) {
    case LossKind::CrossEntropy:
      check_label(label, p.size());
      return -std::log(p[label]);
    case LossKind::Focal:
      return focal_loss(p, label, spec.gamma(), spec.alpha_t());
    case LossKind::LabelSmoothing:
      return label_smoothing_loss(p, label, spec.epsilon());
    case LossKind::MaxEntropy:
      return max_entropy_loss(p, label, spec.beta());
    case LossKind::AlphaJS:
      return alpha_js_loss(p, label, SkewParam(spec.alpha_skew()), spec.beta());
  }
  throw InvalidParameter("unhandled loss kind");
}

std::vector<double> loss_gradient(const LossSpec& spec, const Logits& z,
                                  std::size_t label) {
  const ProbVector p = softmax(z);
  const std::size_t n = p.size();
  check_label(label, n);

  // Common building block: d(cross-entropy)/dz = p - y.
  std::vector<double> grad(n);
  for (std::size_t i = 0; i < n; ++i) grad[i] = p[i];
  grad[label] -= 1.0;

  switch (spec.kind()) {
    case LossKind::CrossEntropy:
      return grad;

    case LossKind::Focal: {
      // d/dz through p_t only: dL/dp_t * p_t (e_label - p).
      const double gamma = spec.gamma();
      const double alpha_t = spec.alpha_t();
      const double pt = p[label];
      const double one_minus = 1.0 - pt;
      double dl_dpt = -alpha_t * std::pow(one_minus, gamma) / pt;
      if (gamma > 0.0) {
        dl_dpt += alpha_t * gamma * std::pow(one_minus, gamma - 1.0) * std::log(pt);
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double indicator = (i == label) ? 1.0 : 0.0;
        grad[i] = dl_dpt * pt * (indicator - p[i]);
      }
      return grad;
    }

    case LossKind::LabelSmoothing: {
      // Cross-entropy against the smoothed target t = (1-eps) y + eps u,
      // so the logit gradient is p - t.
      const double eps = spec.epsilon();
      const double u = 1.0 / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double target = eps * u + ((i == label) ? (1.0 - eps) : 0.0);
        grad[i] = p[i] - target;
      }
      return grad;
    }

    case LossKind::MaxEntropy: {
      // d(-H)/dz_k = p_k (ln p_k + H(p)).
      const double beta = spec.beta();
      const double h = entropy(p);
      for (std::size_t i = 0; i < n; ++i) {
        grad[i] += beta * p[i] * (std::log(p[i]) + h);
      }
      return grad;
    }

    case LossKind::AlphaJS: {
      // Penalty R(p) = J^s_a(u || p) has dR/dp_j = ln(p_j / m_j) / (1 - a)
      // with m = (1-a) u + a p; pushing through softmax gives
      // dR/dz_k = p_k (ln(p_k/m_k) - KL(p || m)) / (1 - a).
      const double beta = spec.beta();
      const double alpha = spec.alpha_skew();
      const double u = 1.0 / static_cast<double>(n);
      std::vector<double> log_ratio(n);
      double kl_pm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double m = (1.0 - alpha) * u + alpha * p[i];
        log_ratio[i] = std::log(p[i] / m);
        kl_pm += p[i] * log_ratio[i];
      }
      const double scale = beta / (1.0 - alpha);
      for (std::size_t i = 0; i < n; ++i) {
        grad[i] += scale * p[i] * (log_ratio[i] - kl_pm);
      }
      return grad;
    }
  }
  throw InvalidParameter("unhandled loss kind");
}

}  // namespace entreg

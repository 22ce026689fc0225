#include "entreg/eval.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "entreg/errors.hpp"
#include "entreg/rng.hpp"
#include "entreg/text.hpp"

namespace entreg {

Confusion::Confusion(int n_classes) : n_classes_(n_classes) {
  if (n_classes < 1) throw InvalidParameter("confusion needs n_classes >= 1");
  counts_.assign(static_cast<std::size_t>(n_classes) * n_classes, 0);
}

std::int64_t& Confusion::at(int true_class, int predicted) {
  if (true_class < 0 || true_class >= n_classes_ || predicted < 0 ||
      predicted >= n_classes_) {
    throw InvalidParameter("confusion index out of range");
  }
  return counts_[static_cast<std::size_t>(true_class) * n_classes_ + predicted];
}

std::int64_t Confusion::at(int true_class, int predicted) const {
  return const_cast<Confusion*>(this)->at(true_class, predicted);
}

std::int64_t Confusion::total() const noexcept {
  std::int64_t t = 0;
  for (std::int64_t v : counts_) t += v;
  return t;
}

std::int64_t Confusion::trace() const noexcept {
  std::int64_t t = 0;
  for (int i = 0; i < n_classes_; ++i) {
    t += counts_[static_cast<std::size_t>(i) * n_classes_ + i];
  }
  return t;
}

Confusion confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                           int n_classes) {
  if (y_true.size() != y_pred.size()) {
    throw LengthMismatch("y_true has " + std::to_string(y_true.size()) +
                         " entries, y_pred has " + std::to_string(y_pred.size()));
  }
  Confusion c(n_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ++c.at(y_true[i], y_pred[i]);
  }
  return c;
}

double accuracy(const Confusion& c) {
  const std::int64_t total = c.total();
  if (total == 0) throw EmptyInput("confusion matrix is empty");
  return static_cast<double>(c.trace()) / static_cast<double>(total);
}

double f1_score(const Confusion& c, int positive_class) {
  if (c.n_classes() != 2) {
    throw InvalidParameter("f1_score is defined for 2-class confusions");
  }
  if (positive_class < 0 || positive_class > 1) {
    throw InvalidParameter("positive_class must be 0 or 1");
  }
  const int neg = 1 - positive_class;
  const double tp = static_cast<double>(c.at(positive_class, positive_class));
  const double fp = static_cast<double>(c.at(neg, positive_class));
  const double fn = static_cast<double>(c.at(positive_class, neg));
  const double denom = 2.0 * tp + fp + fn;
  return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

double mean_normalized_entropy(const std::vector<ProbVector>& probs) {
  if (probs.empty()) throw EmptyInput("no distributions given");
  const std::size_t n = probs.front().size();
  const double log_n = std::log(static_cast<double>(n));
  double sum = 0.0;
  for (const auto& p : probs) {
    if (p.size() != n) throw DimensionMismatch("distributions differ in size");
    sum += entropy(p) / log_n;
  }
  return sum / static_cast<double>(probs.size());
}

double mean_alpha_js_to_uniform(const std::vector<ProbVector>& probs, SkewParam a) {
  if (probs.empty()) throw EmptyInput("no distributions given");
  const std::size_t n = probs.front().size();
  const ProbVector u = ProbVector::uniform(n);
  double sum = 0.0;
  for (const auto& p : probs) {
    if (p.size() != n) throw DimensionMismatch("distributions differ in size");
    sum += alpha_js(u, p, a);
  }
  return sum / static_cast<double>(probs.size());
}

Metrics compute_metrics(std::span<const int> y_true, std::span<const int> y_pred,
                        const std::vector<ProbVector>& probs, int n_classes,
                        int positive_class, SkewParam eval_alpha) {
  Metrics m{confusion_matrix(y_true, y_pred, n_classes)};
  m.accuracy = accuracy(m.confusion);
  m.f1 = n_classes == 2 ? f1_score(m.confusion, positive_class) : 0.0;
  m.mean_normalized_entropy = mean_normalized_entropy(probs);
  m.mean_alpha_js_to_uniform = mean_alpha_js_to_uniform(probs, eval_alpha);
  m.eval_alpha = eval_alpha.value();
  m.positive_class = positive_class;
  return m;
}

void write_metrics(std::ostream& out, const Metrics& m) {
  out << "accuracy=" << format_double(m.accuracy) << '\n';
  out << "f1=" << format_double(m.f1) << '\n';
  out << "positive_class=" << m.positive_class << '\n';
  out << "mean_normalized_entropy=" << format_double(m.mean_normalized_entropy)
      << '\n';
  out << "mean_alpha_js_to_uniform=" << format_double(m.mean_alpha_js_to_uniform)
      << '\n';
  out << "eval_alpha=" << format_double(m.eval_alpha) << '\n';
  out << "confusion=\n";
  for (int t = 0; t < m.confusion.n_classes(); ++t) {
    for (int p = 0; p < m.confusion.n_classes(); ++p) {
      if (p) out << ',';
      out << m.confusion.at(t, p);
    }
    out << '\n';
  }
}

namespace {

constexpr double kPowerTolerance = 1e-10;
constexpr std::size_t kPowerMaxIterations = 10000;
constexpr double kDegenerateGap = 1e-12;

std::vector<double> matvec(const Matrix& m, const std::vector<double>& v) {
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) acc += m(r, c) * v[c];
    out[r] = acc;
  }
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Deterministic unit start vector; distinct per component so a start vector
// exactly orthogonal to the target eigenvector is not a concern in practice.
std::vector<double> start_vector(std::size_t dim, std::size_t component) {
  Rng rng(derive_seed(0x9e3779b9u, component + 1));
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.normal();
  const double n = norm2(v);
  for (auto& x : v) x /= n;
  return v;
}

// Any unit vector orthogonal to `other`; used when the deflated matrix is
// numerically zero (rank-one data).
std::vector<double> orthogonal_unit(const std::vector<double>& other) {
  for (std::size_t i = 0; i < other.size(); ++i) {
    std::vector<double> e(other.size(), 0.0);
    e[i] = 1.0;
    const double proj = dot(e, other);
    for (std::size_t j = 0; j < e.size(); ++j) e[j] -= proj * other[j];
    const double n = norm2(e);
    if (n > 0.5) {
      for (auto& x : e) x /= n;
      return e;
    }
  }
  throw Error("could not build an orthogonal direction");
}

void fix_sign(std::vector<double>& v) {
  std::size_t imax = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  }
  if (v[imax] < 0.0) {
    for (auto& x : v) x = -x;
  }
}

}  // namespace

Projection2D pca_top2(const Matrix& features, std::vector<int> labels) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (n < 3 || d < 2) {
    throw DimensionMismatch("pca_top2 needs >= 3 samples and >= 2 features, got " +
                            std::to_string(n) + " x " + std::to_string(d));
  }
  if (!labels.empty() && labels.size() != n) {
    throw LengthMismatch("labels do not match the sample count");
  }

  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += features(i, j);
  }
  for (auto& v : mean) v /= static_cast<double>(n);

  Matrix centered(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      centered(i, j) = features(i, j) - mean[j];
    }
  }

  // Sample covariance (divides by n - 1).
  Matrix cov(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      const double xa = centered(i, a);
      for (std::size_t b = a; b < d; ++b) {
        cov(a, b) += xa * centered(i, b);
      }
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      const double v = cov(a, b) / static_cast<double>(n - 1);
      cov(a, b) = v;
      cov(b, a) = v;
    }
  }

  std::array<std::vector<double>, 2> comps;
  std::array<double, 2> eigenvalues{0.0, 0.0};
  for (std::size_t comp = 0; comp < 2; ++comp) {
    std::vector<double> v = start_vector(d, comp);
    if (comp == 1) {
      const double proj = dot(v, comps[0]);
      for (std::size_t j = 0; j < d; ++j) v[j] -= proj * comps[0][j];
      const double nv = norm2(v);
      if (nv > 0.0) {
        for (auto& x : v) x /= nv;
      } else {
        v = orthogonal_unit(comps[0]);
      }
    }
    for (std::size_t iter = 0; iter < kPowerMaxIterations; ++iter) {
      std::vector<double> w = matvec(cov, v);
      if (comp == 1) {
        const double proj = dot(w, comps[0]);
        for (std::size_t j = 0; j < d; ++j) w[j] -= proj * comps[0][j];
      }
      const double nw = norm2(w);
      if (nw == 0.0) {
        // Remaining spectrum is numerically zero; keep the current direction.
        if (comp == 1) v = orthogonal_unit(comps[0]);
        break;
      }
      if (dot(w, v) < 0.0) {
        for (auto& x : w) x = -x;
      }
      for (auto& x : w) x /= nw;
      double change = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = w[j] - v[j];
        change += diff * diff;
      }
      v = std::move(w);
      if (std::sqrt(change) < kPowerTolerance) break;
    }
    eigenvalues[comp] = dot(v, matvec(cov, v));
    fix_sign(v);
    comps[comp] = std::move(v);
    if (comp == 0) {
      // Deflate the leading eigenpair before extracting the second.
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
          cov(a, b) -= eigenvalues[0] * comps[0][a] * comps[0][b];
        }
      }
    }
  }

  const double ortho = std::abs(dot(comps[0], comps[1]));
  const double n0 = std::abs(norm2(comps[0]) - 1.0);
  const double n1 = std::abs(norm2(comps[1]) - 1.0);
  if (ortho > 1e-9 || n0 > 1e-9 || n1 > 1e-9) {
    throw Error("pca_top2: components failed the orthonormality check");
  }

  Projection2D proj;
  proj.points = Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    double p0 = 0.0;
    double p1 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      p0 += centered(i, j) * comps[0][j];
      p1 += centered(i, j) * comps[1][j];
    }
    proj.points(i, 0) = p0;
    proj.points(i, 1) = p1;
  }
  proj.components = Matrix(2, d);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t j = 0; j < d; ++j) proj.components(c, j) = comps[c][j];
  }
  proj.explained_variance = eigenvalues;
  proj.labels = std::move(labels);
  proj.degenerate_spectrum = (eigenvalues[0] - eigenvalues[1]) < kDegenerateGap;
  return proj;
}

void write_projection_csv(std::ostream& out, const Projection2D& proj) {
  out << "pc1,pc2,label\n";
  for (std::size_t i = 0; i < proj.points.rows(); ++i) {
    const int label = proj.labels.empty() ? -1 : proj.labels[i];
    out << format_double(proj.points(i, 0)) << ',' << format_double(proj.points(i, 1))
        << ',' << label << '\n';
  }
}

}  // namespace entreg

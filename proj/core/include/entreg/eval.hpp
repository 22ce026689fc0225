#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "entreg/matrix.hpp"
#include "entreg/prob.hpp"

namespace entreg {

/// Square count matrix; entry (t, p) counts samples of true class t that
/// were predicted as class p.
class Confusion {
 public:
  Confusion() : Confusion(1) {}
  explicit Confusion(int n_classes);
  int n_classes() const noexcept { return n_classes_; }
  std::int64_t& at(int true_class, int predicted);
  std::int64_t at(int true_class, int predicted) const;
  std::int64_t total() const noexcept;
  std::int64_t trace() const noexcept;

 private:
  int n_classes_;
  std::vector<std::int64_t> counts_;
};

Confusion confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                           int n_classes);

double accuracy(const Confusion& c);

/// 2 TP / (2 TP + FP + FN) for the given positive class; 0 when the
/// denominator is 0. Two-class confusions only.
double f1_score(const Confusion& c, int positive_class);

/// Mean over samples of H(p) / ln n, in [0, 1].
double mean_normalized_entropy(const std::vector<ProbVector>& probs);

/// Mean over samples of the scaled skew-JS divergence J^s_a(u || p),
/// uniform first.
double mean_alpha_js_to_uniform(const std::vector<ProbVector>& probs, SkewParam a);

struct Metrics {
  Confusion confusion;
  double accuracy = 0.0;
  double f1 = 0.0;
  double mean_normalized_entropy = 0.0;
  double mean_alpha_js_to_uniform = 0.0;
  double eval_alpha = 0.0;
  int positive_class = 0;
};

Metrics compute_metrics(std::span<const int> y_true, std::span<const int> y_pred,
                        const std::vector<ProbVector>& probs, int n_classes,
                        int positive_class, SkewParam eval_alpha);

/// key=value lines followed by a `confusion=` sentinel and one CSV row per
/// true class. Byte-deterministic.
void write_metrics(std::ostream& out, const Metrics& m);

/// Top-two principal component projection. Component directions are
/// orthonormal (verified at construction) and sign-fixed so the largest
/// magnitude coordinate of each direction is positive. degenerate_spectrum
/// flags a leading eigen-gap below 1e-12, where the component pair is an
/// arbitrary rotation.
struct Projection2D {
  Matrix points;      // n x 2
  Matrix components;  // 2 x d, one direction per row
  std::array<double, 2> explained_variance{0.0, 0.0};
  std::vector<int> labels;
  bool degenerate_spectrum = false;
};

/// Mean-centers the rows, then extracts the two leading eigenpairs of the
/// sample covariance by power iteration with deflation (change tolerance
/// 1e-10, at most 1e4 iterations per component). Requires >= 3 samples and
/// >= 2 features. `labels`, when given, must match the row count.
Projection2D pca_top2(const Matrix& features, std::vector<int> labels = {});

/// CSV with header `pc1,pc2,label` (label -1 when none were attached).
void write_projection_csv(std::ostream& out, const Projection2D& proj);

}  // namespace entreg

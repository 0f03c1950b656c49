#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <string>

#include "calib/error.hpp"

namespace calib {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using LabelVector = Eigen::VectorXi;

/// n x K logits (one sample per row) with 0-indexed integer labels.
/// Construction validates: n >= 1, K >= 2, finite logits, labels in [0, K).
class LogitDataset {
 public:
  LogitDataset(Matrix logits, LabelVector labels);

  const Matrix& logits() const noexcept { return logits_; }
  const LabelVector& labels() const noexcept { return labels_; }
  Eigen::Index size() const noexcept { return logits_.rows(); }
  Eigen::Index num_classes() const noexcept { return logits_.cols(); }

 private:
  Matrix logits_;
  LabelVector labels_;
};

/// Scores in [0, 1] paired with {0, 1} outcomes.
class BinaryCalibrationSet {
 public:
  BinaryCalibrationSet(Vector scores, LabelVector outcomes);

  const Vector& scores() const noexcept { return scores_; }
  const LabelVector& outcomes() const noexcept { return outcomes_; }
  Eigen::Index size() const noexcept { return scores_.size(); }
  Eigen::Index positives() const noexcept { return outcomes_.sum(); }

 private:
  Vector scores_;
  LabelVector outcomes_;
};

struct Prediction {
  int label = 0;
  double confidence = 0.0;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.derived().array().isFinite().all();
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& z) {
  using std::exp;
  using std::log;
  const auto m = z.maxCoeff();
  return m + log((z.array() - m).exp().sum());
}

/// Numerically stable softmax of a logit vector (max-subtracted).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(const Eigen::MatrixBase<Derived>& z) {
  if (!all_finite(z)) throw Error(ErrorKind::NonFiniteInput, "softmax: non-finite logit");
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> p = (z.array() - z.maxCoeff()).exp().matrix();
  p /= p.sum();
  return p;
}

/// Row-wise softmax of an n x K logit matrix.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> softmax_rows(
    const Eigen::MatrixBase<Derived>& z) {
  if (!all_finite(z)) throw Error(ErrorKind::NonFiniteInput, "softmax: non-finite logit");
  using M = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  M p = (z.colwise() - z.rowwise().maxCoeff()).array().exp().matrix();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

/// Index of the largest entry; ties resolve to the lowest index.
template <typename Derived>
int argmax(const Eigen::MatrixBase<Derived>& z) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < z.size(); ++k) {
    if (z(k) > z(best)) best = k;
  }
  return static_cast<int>(best);
}

Prediction predict(const Eigen::Ref<const Vector>& z);

/// Per-sample labels, confidences and full distributions for a batch.
struct Predictions {
  LabelVector labels;
  Vector confidences;
  Matrix probs;
};

/// Uncalibrated predictions: argmax of the logits and softmax of each row.
Predictions predict_all(const LogitDataset& d);

/// One-vs-all view of class k: scores are softmax(z_i)[k], outcomes 1 iff label == k.
BinaryCalibrationSet to_one_vs_all(const LogitDataset& d, int k);

/// Reads a headerless logits CSV (n rows x K columns) and a labels CSV (n rows).
LogitDataset load_logits(const std::filesystem::path& logits_path, const std::filesystem::path& labels_path);

/// Same formats as load_logits, from in-memory text.
LogitDataset parse_logits(const std::string& logits_csv, const std::string& labels_csv);

/// Logits alone, for applying a model to unlabeled data. Cells are validated as in load_logits.
Matrix load_logit_matrix(const std::filesystem::path& logits_path);
Matrix parse_logit_matrix(const std::string& logits_csv);

void save_logits(const LogitDataset& d, const std::filesystem::path& logits_path,
                 const std::filesystem::path& labels_path);

/// Shortest round-trip decimal representation.
std::string format_double(double x);

}  // namespace calib

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "calib/dataset.hpp"

namespace calib {

using Mask = Eigen::Matrix<bool, Eigen::Dynamic, 1>;

inline constexpr int kDefaultBins = 15;
inline constexpr double kProbabilityFloor = 1e-12;

struct ReliabilityBin {
  double lower = 0.0;  // exclusive, except bin 1 also takes confidence 0
  double upper = 0.0;  // inclusive
  Eigen::Index count = 0;
  std::optional<double> accuracy;         // absent for empty bins
  std::optional<double> mean_confidence;  // absent for empty bins
};

/// Equal-width reliability histogram over (0, 1]: bin m covers ((m-1)/M, m/M].
struct ReliabilityHistogram {
  int m_bins = 0;
  std::vector<ReliabilityBin> bins;

  Eigen::Index total() const;
};

struct MetricsReport {
  double ece = 0.0;
  double mce = 0.0;
  double nll = 0.0;  // summed over samples, nats
  double error_rate = 0.0;
  double mean_entropy = 0.0;
  ReliabilityHistogram histogram;
};

/// 1-based bin of a confidence under M equal-width bins, consistent with the bounds m/M.
int bin_index(double confidence, int m_bins);

ReliabilityHistogram build_histogram(const Eigen::Ref<const Vector>& confidences, const Mask& correct, int m_bins);

/// Expected calibration error: sum over bins of (|B_m| / n) |acc - conf|.
double ece(const ReliabilityHistogram& h, Eigen::Index n);

/// Maximum calibration error over nonempty bins.
double mce(const ReliabilityHistogram& h);

/// Summed negative log-likelihood of the true labels; probabilities floored at 1e-12.
double nll(const Eigen::Ref<const Matrix>& probs, const LabelVector& labels);

/// Mean Shannon entropy (nats) of the rows of `probs`, with 0 log 0 = 0.
double mean_entropy(const Eigen::Ref<const Matrix>& probs);

MetricsReport evaluate(const Predictions& predictions, const LabelVector& labels, int m_bins = kDefaultBins);

MetricsReport evaluate(const LogitDataset& d, int m_bins = kDefaultBins);

/// Reliability table: header `bin_lower,bin_upper,count,accuracy,mean_confidence`, empty fields for empty bins.
std::string reliability_table_csv(const ReliabilityHistogram& h);

}  // namespace calib

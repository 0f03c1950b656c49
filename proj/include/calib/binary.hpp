#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "calib/dataset.hpp"

namespace calib {

enum class BinningMode { EqualWidth, EqualFrequency };

/// Piecewise-constant map on [0, 1]. Bin m covers [boundaries[m], boundaries[m+1]); the last bin also takes 1.
struct HistogramBinningModel {
  Vector boundaries;  // M + 1 entries, 0 ... 1, nondecreasing
  Vector thetas;      // M entries
};

/// Monotone step function: values[j] holds on [breakpoints[j], breakpoints[j+1]).
/// Scores below the first breakpoint take values[0]; the last piece extends to 1.
struct IsotonicModel {
  Vector breakpoints;  // strictly increasing
  Vector values;       // nondecreasing
};

struct BetaPrior {
  double alpha = 1.0;
  double beta = 1.0;
};

/// One binning scheme of a BBQ ensemble with its per-bin Beta posteriors.
struct BinningScheme {
  Vector boundaries;
  Vector alphas;
  Vector betas;
  double log_marginal_likelihood = 0.0;
};

struct BBQModel {
  std::vector<BinningScheme> schemes;
  Vector log_weights;  // normalized: log-sum-exp is 0
};

struct PlattModel {
  double a = 1.0;
  double b = 0.0;
};

using BinaryModel = std::variant<HistogramBinningModel, IsotonicModel, BBQModel, PlattModel>;

Vector equal_width_boundaries(int m_bins);

/// Quantile boundaries: each interior boundary is the midpoint between the sorted scores it separates.
Vector equal_frequency_boundaries(const Eigen::Ref<const Vector>& scores, int m_bins);

/// 0-based bin containing `score` under the half-open convention above.
int find_bin(const Vector& boundaries, double score);

HistogramBinningModel fit_histogram(const BinaryCalibrationSet& s, int m_bins,
                                    BinningMode mode = BinningMode::EqualFrequency);

/// Weighted pool-adjacent-violators: least-squares nondecreasing fit of `values`.
Vector pava(const Eigen::Ref<const Vector>& values, const Eigen::Ref<const Vector>& weights);

/// Isotonic regression of outcomes on scores. Tied scores are pooled first so the result is a function of the score.
IsotonicModel fit_isotonic(const BinaryCalibrationSet& s);

/// Equal-frequency candidates M = 1 ... 3 * ceil(n^(1/3)).
std::vector<int> default_bbq_candidates(Eigen::Index n);

BBQModel fit_bbq(const BinaryCalibrationSet& s, const std::vector<int>& candidate_bin_counts, BetaPrior prior = {});

/// Logistic fit q = sigmoid(a z + b) by NLL minimization. Without `logits`, z = logit(clamp(score)).
PlattModel fit_platt(const BinaryCalibrationSet& s, const std::optional<Vector>& logits = std::nullopt);

/// logit(clamp(p, 1e-12, 1 - 1e-12)).
double score_logit(double p);

double sigmoid(double t);

double apply(const HistogramBinningModel& m, double score);
double apply(const IsotonicModel& m, double score);
double apply(const BBQModel& m, double score);
double apply(const PlattModel& m, double score, std::optional<double> logit = std::nullopt);
double apply(const BinaryModel& m, double score, std::optional<double> logit = std::nullopt);

}  // namespace calib

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "calib/binary.hpp"
#include "calib/optimize.hpp"

namespace calib {

struct TemperatureModel {
  double temperature = 1.0;
};

enum class AffineKind { Vector, Matrix };

/// Logit transform W z + b. Vector kind keeps W diagonal.
struct AffineScalingModel {
  Matrix weight;
  Vector bias;
  AffineKind kind = AffineKind::Matrix;

  static AffineScalingModel identity(Eigen::Index num_classes, AffineKind kind);
};

enum class BinaryMethod { Histogram, Isotonic, BBQ };

struct OneVsAllModel {
  BinaryMethod method = BinaryMethod::Histogram;
  std::vector<BinaryModel> per_class;
};

struct CalibratedOutput {
  int label = 0;
  double confidence = 0.0;
  std::optional<Vector> full_distribution;
};

inline constexpr double kMinTemperature = 0.05;
inline constexpr double kMaxTemperature = 50.0;

/// Mean NLL of softmax(z / T) over the dataset.
double temperature_nll(const LogitDataset& d, double temperature);

/// Minimizes NLL over T in [0.05, 50]. Throws BoundaryOptimum when the minimizer sits on the interval edge.
TemperatureModel fit_temperature(const LogitDataset& d);

struct AffineFitOptions {
  double grad_tol = 1e-7;
  int max_iters = 50000;
};

struct AffineFit {
  AffineScalingModel model;
  int iterations = 0;
  double mean_nll = 0.0;
  std::vector<std::string> warnings;
};

/// Number of free parameters: K (diagonal) or K^2 weights, plus K biases.
Eigen::Index affine_param_count(Eigen::Index num_classes, AffineKind kind);

Vector flatten(const AffineScalingModel& m);
AffineScalingModel unflatten(const Vector& params, Eigen::Index num_classes, AffineKind kind);

/// Mean NLL of softmax(W z + b) as a function of the flattened parameters (weights row-major, then bias).
optimize::Objective affine_objective(const LogitDataset& d, AffineKind kind);

AffineFit fit_affine(const LogitDataset& d, AffineKind kind, const AffineFitOptions& options = {});

struct OneVsAllOptions {
  int histogram_bins = 15;
  std::vector<int> bbq_candidates;  // empty: default_bbq_candidates(n)
};

OneVsAllModel fit_one_vs_all(const LogitDataset& d, BinaryMethod method, const OneVsAllOptions& options = {});

CalibratedOutput apply(const TemperatureModel& m, const Eigen::Ref<const Vector>& z);
CalibratedOutput apply(const AffineScalingModel& m, const Eigen::Ref<const Vector>& z);
CalibratedOutput apply(const OneVsAllModel& m, const Eigen::Ref<const Vector>& z);

}  // namespace calib

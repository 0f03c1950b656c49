#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "calib/multiclass.hpp"

namespace calib {

/// Any fitted calibration map. Binary models act on two-class data through the class-1 probability.
using Calibrator = std::variant<HistogramBinningModel, IsotonicModel, BBQModel, PlattModel, TemperatureModel,
                                AffineScalingModel, OneVsAllModel>;

enum class Method {
  Histogram,
  Isotonic,
  BBQ,
  Platt,
  Temperature,
  Vector,
  Matrix,
  OvaHistogram,
  OvaIsotonic,
  OvaBBQ,
};

/// Command-line spelling, e.g. "ova-histogram".
std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view name);
std::vector<std::string_view> method_names();

bool is_binary(Method m);

struct FitOptions {
  int histogram_bins = 15;
  std::vector<int> bbq_candidates;  // empty: default_bbq_candidates(n)
};

struct FitOutcome {
  Calibrator model;
  std::vector<std::string> warnings;
  std::string summary;
};

FitOutcome fit(Method method, const LogitDataset& d, const FitOptions& options = {});

/// Classes the model was fitted for, or nullopt when it applies to any K (temperature scaling).
std::optional<Eigen::Index> expected_classes(const Calibrator& c);

Predictions apply(const Calibrator& c, const Eigen::Ref<const Matrix>& logits);

}  // namespace calib

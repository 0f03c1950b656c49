#include "calib/calibrator.hpp"

#include <array>
#include <utility>

namespace calib {
namespace {

constexpr std::array<std::pair<Method, std::string_view>, 10> kNames{{
    {Method::Histogram, "histogram"},
    {Method::Isotonic, "isotonic"},
    {Method::BBQ, "bbq"},
    {Method::Platt, "platt"},
    {Method::Temperature, "temperature"},
    {Method::Vector, "vector"},
    {Method::Matrix, "matrix"},
    {Method::OvaHistogram, "ova-histogram"},
    {Method::OvaIsotonic, "ova-isotonic"},
    {Method::OvaBBQ, "ova-bbq"},
}};

BinaryCalibrationSet positive_class_view(const LogitDataset& d) {
  if (d.num_classes() != 2) {
    throw Error(ErrorKind::DimensionMismatch,
                "binary methods need two-class data, got K = " + std::to_string(d.num_classes()));
  }
  return to_one_vs_all(d, 1);
}

std::string describe_affine(const AffineFit& f) {
  const auto& w = f.model.weight;
  return std::string(f.model.kind == AffineKind::Vector ? "vector" : "matrix") + " scaling: " +
         std::to_string(f.iterations) + " steps, mean NLL " + format_double(f.mean_nll) + ", mean diagonal " +
         format_double(w.diagonal().mean());
}

void append_binary(Predictions& out, Eigen::Index i, double q) {
  out.probs(i, 0) = 1.0 - q;
  out.probs(i, 1) = q;
  out.labels(i) = q > 1.0 - q ? 1 : 0;
  out.confidences(i) = out.probs(i, out.labels(i));
}

}  // namespace

std::string_view method_name(Method m) {
  for (const auto& [method, name] : kNames) {
    if (method == m) return name;
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (const auto& [method, spelled] : kNames) {
    if (spelled == name) return method;
  }
  return std::nullopt;
}

std::vector<std::string_view> method_names() {
  std::vector<std::string_view> names;
  for (const auto& entry : kNames) names.push_back(entry.second);
  return names;
}

bool is_binary(Method m) {
  return m == Method::Histogram || m == Method::Isotonic || m == Method::BBQ || m == Method::Platt;
}

FitOutcome fit(Method method, const LogitDataset& d, const FitOptions& options) {
  const auto candidates = options.bbq_candidates.empty() ? default_bbq_candidates(d.size()) : options.bbq_candidates;
  OneVsAllOptions ova{options.histogram_bins, candidates};
  switch (method) {
    case Method::Histogram:
      return {fit_histogram(positive_class_view(d), options.histogram_bins), {}, "histogram binning fitted"};
    case Method::Isotonic: {
      auto m = fit_isotonic(positive_class_view(d));
      auto pieces = m.values.size();
      return {std::move(m), {}, "isotonic regression: " + std::to_string(pieces) + " pieces"};
    }
    case Method::BBQ:
      return {fit_bbq(positive_class_view(d), candidates), {}, "BBQ: " + std::to_string(candidates.size()) + " schemes"};
    case Method::Platt: {
      const auto set = positive_class_view(d);
      const Vector margin = d.logits().col(1) - d.logits().col(0);
      auto m = fit_platt(set, margin);
      return {m, {}, "platt: a = " + format_double(m.a) + ", b = " + format_double(m.b)};
    }
    case Method::Temperature: {
      auto m = fit_temperature(d);
      return {m, {}, "temperature: " + format_double(m.temperature)};
    }
    case Method::Vector:
    case Method::Matrix: {
      auto f = fit_affine(d, method == Method::Vector ? AffineKind::Vector : AffineKind::Matrix);
      auto summary = describe_affine(f);
      return {std::move(f.model), std::move(f.warnings), std::move(summary)};
    }
    case Method::OvaHistogram:
      return {fit_one_vs_all(d, BinaryMethod::Histogram, ova), {}, "one-vs-all histogram binning fitted"};
    case Method::OvaIsotonic:
      return {fit_one_vs_all(d, BinaryMethod::Isotonic, ova), {}, "one-vs-all isotonic regression fitted"};
    case Method::OvaBBQ:
      return {fit_one_vs_all(d, BinaryMethod::BBQ, ova), {}, "one-vs-all BBQ fitted"};
  }
  throw Error(ErrorKind::Usage, "unknown method");
}

std::optional<Eigen::Index> expected_classes(const Calibrator& c) {
  return std::visit(
      [](const auto& m) -> std::optional<Eigen::Index> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TemperatureModel>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, AffineScalingModel>) {
          return m.bias.size();
        } else if constexpr (std::is_same_v<T, OneVsAllModel>) {
          return static_cast<Eigen::Index>(m.per_class.size());
        } else {
          return 2;
        }
      },
      c);
}

Predictions apply(const Calibrator& c, const Eigen::Ref<const Matrix>& logits) {
  const auto n = logits.rows();
  const auto k = logits.cols();
  if (auto expected = expected_classes(c); expected && *expected != k) {
    throw Error(ErrorKind::DimensionMismatch,
                "model expects " + std::to_string(*expected) + " classes but logits have " + std::to_string(k));
  }
  Predictions out{LabelVector(n), Vector(n), Matrix(n, k)};
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        for (Eigen::Index i = 0; i < n; ++i) {
          const Vector z = logits.row(i).transpose();
          if constexpr (std::is_same_v<T, TemperatureModel> || std::is_same_v<T, AffineScalingModel> ||
                        std::is_same_v<T, OneVsAllModel>) {
            auto r = calib::apply(m, z);
            out.labels(i) = r.label;
            out.confidences(i) = r.confidence;
            out.probs.row(i) = r.full_distribution->transpose();
          } else if constexpr (std::is_same_v<T, PlattModel>) {
            if (!all_finite(z)) throw Error(ErrorKind::NonFiniteInput, "non-finite logit");
            append_binary(out, i, calib::apply(m, softmax(z)(1), z(1) - z(0)));
          } else {
            append_binary(out, i, calib::apply(m, softmax(z)(1)));
          }
        }
      },
      c);
  return out;
}

}  // namespace calib

#include "calib/multiclass.hpp"

#include <cmath>

namespace calib {
namespace {

void require_finite(const Eigen::Ref<const Vector>& z) {
  if (!all_finite(z)) throw Error(ErrorKind::NonFiniteInput, "non-finite logit");
}

void require_dim(Eigen::Index expected, Eigen::Index got) {
  if (expected != got) {
    throw Error(ErrorKind::DimensionMismatch,
                "model expects " + std::to_string(expected) + " classes but logits have " + std::to_string(got));
  }
}

CalibratedOutput from_distribution(Vector dist, int label) {
  CalibratedOutput out;
  out.label = label;
  out.confidence = dist(label);
  out.full_distribution = std::move(dist);
  return out;
}

/// Row-wise softmax minus one-hot labels, and the mean NLL, for transformed logits.
double softmax_residual(const Matrix& transformed, const LabelVector& labels, Matrix& residual) {
  const auto n = transformed.rows();
  const Vector row_max = transformed.rowwise().maxCoeff();
  residual = (transformed.colwise() - row_max).array().exp().matrix();
  const Vector sums = residual.rowwise().sum();
  residual.array().colwise() /= sums.array();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    total += row_max(i) + std::log(sums(i)) - transformed(i, labels(i));
    residual(i, labels(i)) -= 1.0;
  }
  return total / static_cast<double>(n);
}

}  // namespace

AffineScalingModel AffineScalingModel::identity(Eigen::Index num_classes, AffineKind kind) {
  return {Matrix::Identity(num_classes, num_classes), Vector::Zero(num_classes), kind};
}

double temperature_nll(const LogitDataset& d, double temperature) {
  const auto& z = d.logits();
  double total = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const Vector scaled = z.row(i).transpose() / temperature;
    total += log_sum_exp(scaled) - scaled(d.labels()(i));
  }
  return total / static_cast<double>(d.size());
}

TemperatureModel fit_temperature(const LogitDataset& d) {
  // The contract is 1e-6 in T; golden-section resolves further at no real cost.
  const auto r = optimize::minimize_scalar([&](double t) { return temperature_nll(d, t); }, kMinTemperature,
                                           kMaxTemperature, 1e-9);
  if (r.at_boundary) {
    throw Error(ErrorKind::BoundaryOptimum, "temperature: NLL minimum at search boundary T = " +
                                                format_double(r.argmin) + " (interval [" +
                                                format_double(kMinTemperature) + ", " +
                                                format_double(kMaxTemperature) + "])");
  }
  return {r.argmin};
}

Eigen::Index affine_param_count(Eigen::Index num_classes, AffineKind kind) {
  return (kind == AffineKind::Vector ? num_classes : num_classes * num_classes) + num_classes;
}

Vector flatten(const AffineScalingModel& m) {
  const auto k = m.bias.size();
  Vector p(affine_param_count(k, m.kind));
  if (m.kind == AffineKind::Vector) {
    p.head(k) = m.weight.diagonal();
  } else {
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(p.data(), k, k) = m.weight;
  }
  p.tail(k) = m.bias;
  return p;
}

AffineScalingModel unflatten(const Vector& params, Eigen::Index num_classes, AffineKind kind) {
  const auto k = num_classes;
  if (params.size() != affine_param_count(k, kind)) {
    throw Error(ErrorKind::DimensionMismatch, "affine: parameter vector has wrong length");
  }
  AffineScalingModel m{Matrix::Zero(k, k), params.tail(k), kind};
  if (kind == AffineKind::Vector) {
    m.weight.diagonal() = params.head(k);
  } else {
    m.weight = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        params.data(), k, k);
  }
  return m;
}

optimize::Objective affine_objective(const LogitDataset& d, AffineKind kind) {
  return [&d, kind, residual = Matrix(), transformed = Matrix()](const Vector& p, Vector& grad) mutable {
    const auto& z = d.logits();
    const auto k = d.num_classes();
    const double inv_n = 1.0 / static_cast<double>(d.size());
    const Eigen::Ref<const Vector> bias = p.tail(k);
    if (kind == AffineKind::Vector) {
      transformed = z * p.head(k).asDiagonal();
    } else {
      const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w(p.data(), k, k);
      transformed.noalias() = z * w.transpose();
    }
    transformed.rowwise() += bias.transpose();
    const double value = softmax_residual(transformed, d.labels(), residual);

    grad.resize(p.size());
    if (kind == AffineKind::Vector) {
      grad.head(k) = (residual.array() * z.array()).colwise().sum().transpose() * inv_n;
    } else {
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gw(grad.data(), k, k);
      gw.noalias() = residual.transpose() * z * inv_n;
    }
    grad.tail(k) = residual.colwise().sum().transpose() * inv_n;
    return value;
  };
}

AffineFit fit_affine(const LogitDataset& d, AffineKind kind, const AffineFitOptions& options) {
  const auto n = d.size();
  const auto k = d.num_classes();
  if (n < k) {
    throw Error(ErrorKind::Validation, "affine scaling: need at least K = " + std::to_string(k) + " samples, got " +
                                           std::to_string(n));
  }
  AffineFit fit;
  if (kind == AffineKind::Matrix && n < 10 * k * k) {
    fit.warnings.push_back("matrix scaling: " + std::to_string(n) + " samples for " + std::to_string(k * k + k) +
                           " parameters (fewer than 10 K^2); the fit is likely to overfit");
  }

  const auto result = optimize::minimize_grad(affine_objective(d, kind),
                                              flatten(AffineScalingModel::identity(k, kind)), options.grad_tol,
                                              options.max_iters);
  if (!result.converged) {
    throw Error(ErrorKind::NonConvergence, std::string(kind == AffineKind::Vector ? "vector" : "matrix") +
                                               " scaling: gradient max-norm " + format_double(result.grad_max_norm) +
                                               " after " + std::to_string(result.iterations) + " steps");
  }
  fit.model = unflatten(result.params, k, kind);
  fit.iterations = result.iterations;
  fit.mean_nll = result.value;
  return fit;
}

OneVsAllModel fit_one_vs_all(const LogitDataset& d, BinaryMethod method, const OneVsAllOptions& options) {
  OneVsAllModel model{method, {}};
  const auto candidates = options.bbq_candidates.empty() ? default_bbq_candidates(d.size()) : options.bbq_candidates;
  for (int k = 0; k < d.num_classes(); ++k) {
    const auto set = to_one_vs_all(d, k);
    try {
      switch (method) {
        case BinaryMethod::Histogram:
          model.per_class.emplace_back(fit_histogram(set, options.histogram_bins));
          break;
        case BinaryMethod::Isotonic:
          model.per_class.emplace_back(fit_isotonic(set));
          break;
        case BinaryMethod::BBQ:
          model.per_class.emplace_back(fit_bbq(set, candidates));
          break;
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "class " + std::to_string(k) + ": " + e.what());
    }
  }
  return model;
}

CalibratedOutput apply(const TemperatureModel& m, const Eigen::Ref<const Vector>& z) {
  if (!(m.temperature > 0.0) || !std::isfinite(m.temperature)) {
    throw Error(ErrorKind::UnfittedModel, "temperature must be finite and positive");
  }
  require_finite(z);
  return from_distribution(softmax(z / m.temperature), argmax(z));
}

CalibratedOutput apply(const AffineScalingModel& m, const Eigen::Ref<const Vector>& z) {
  require_dim(m.bias.size(), z.size());
  require_finite(z);
  const Vector transformed = m.weight * z + m.bias;
  return from_distribution(softmax(transformed), argmax(transformed));
}

CalibratedOutput apply(const OneVsAllModel& m, const Eigen::Ref<const Vector>& z) {
  if (m.per_class.empty()) throw Error(ErrorKind::UnfittedModel, "one-vs-all: model is not fitted");
  require_dim(static_cast<Eigen::Index>(m.per_class.size()), z.size());
  require_finite(z);
  const Vector p = softmax(z);
  Vector q(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) q(k) = apply(m.per_class[k], p(k));
  const double mass = q.sum();
  if (!(mass > 0.0)) throw Error(ErrorKind::ZeroMassVector, "one-vs-all: every calibrated probability is zero");
  const int label = argmax(q);
  return from_distribution(q / mass, label);
}

}  // namespace calib

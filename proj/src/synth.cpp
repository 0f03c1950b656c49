#include "calib/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace calib::synth {

double Stream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Stream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

void validate(const SynthSpec& spec) {
  if (spec.n < 1) throw Error(ErrorKind::Validation, "synth: n must be at least 1");
  if (spec.k < 2) throw Error(ErrorKind::Validation, "synth: need at least two classes");
  if (!(spec.sharpening > 0.0) || !std::isfinite(spec.sharpening)) {
    throw Error(ErrorKind::Validation, "synth: sharpening must be positive");
  }
  if (!(spec.logit_scale > 0.0) || !std::isfinite(spec.logit_scale)) {
    throw Error(ErrorKind::Validation, "synth: logit scale must be positive");
  }
}

LogitDataset gen_sharpened(const SynthSpec& spec) {
  validate(spec);
  Stream stream(spec.seed);
  Matrix logits(spec.n, spec.k);
  LabelVector labels(spec.n);
  Vector z(spec.k);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    for (Eigen::Index k = 0; k < spec.k; ++k) z(k) = spec.logit_scale * stream.normal();
    const Vector p = softmax(z);
    const double u = stream.uniform();
    double cumulative = 0.0;
    Eigen::Index label = spec.k - 1;
    for (Eigen::Index k = 0; k < spec.k; ++k) {
      cumulative += p(k);
      if (u < cumulative) {
        label = k;
        break;
      }
    }
    labels(i) = static_cast<int>(label);
    logits.row(i) = spec.sharpening * z.transpose();
  }
  return {std::move(logits), std::move(labels)};
}

BinaryCalibrationSet gen_binary(Eigen::Index n, double noise, std::uint64_t seed) {
  if (n < 0) throw Error(ErrorKind::Validation, "synth: n must be nonnegative");
  if (!(noise >= 0.0 && noise <= 0.5)) throw Error(ErrorKind::Validation, "synth: noise must lie in [0, 0.5]");
  Stream stream(seed);
  Vector scores(n);
  LabelVector outcomes(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    scores(i) = stream.uniform();
    const double jitter = noise * (2.0 * stream.uniform() - 1.0);
    const double p = std::clamp(scores(i) + jitter, 0.0, 1.0);
    outcomes(i) = stream.uniform() < p ? 1 : 0;
  }
  return {std::move(scores), std::move(outcomes)};
}

}  // namespace calib::synth

#pragma once

#include <cstdint>
#include <random>

#include "calib/dataset.hpp"

namespace calib::synth {

/// Parameters of a sharpened-softmax dataset. Labels follow softmax(z) for base logits z ~ N(0, logit_scale^2)^K;
/// the emitted logits are sharpening * z, so the NLL-optimal temperature is `sharpening`.
struct SynthSpec {
  Eigen::Index n = 1000;
  Eigen::Index k = 10;
  double sharpening = 1.0;
  double logit_scale = 1.0;
  std::uint64_t seed = 0;
};

/// Random stream shared by the generators: std::mt19937_64 (fully specified by the C++ standard) seeded with the
/// 64-bit seed. Uniforms take the top 53 bits of one draw; normals use Box-Muller on two uniforms and cache the
/// second variate. Nothing here goes through <random> distributions, whose output is implementation-defined.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

void validate(const SynthSpec& spec);

LogitDataset gen_sharpened(const SynthSpec& spec);

/// Uniform scores; outcome 1 with probability clamp(score + U(-noise, noise), 0, 1).
BinaryCalibrationSet gen_binary(Eigen::Index n, double noise, std::uint64_t seed);

}  // namespace calib::synth

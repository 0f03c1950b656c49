#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "calib/metrics.hpp"
#include "calib/multiclass.hpp"
#include "calib/synth.hpp"
#include "test_util.hpp"

using namespace calib;
using testing::ivec;
using testing::kind_of;
using testing::vec;

namespace {

LogitDataset sharpened(double s, std::uint64_t seed, Eigen::Index n = 5000, Eigen::Index k = 10, double scale = 2.0) {
  return synth::gen_sharpened({n, k, s, scale, seed});
}

double affine_nll(const AffineScalingModel& m, const LogitDataset& d) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const Vector t = m.weight * d.logits().row(i).transpose() + m.bias;
    total += log_sum_exp(t) - t(d.labels()(i));
  }
  return total / static_cast<double>(d.size());
}

}  // namespace

TEST_CASE("temperature scaling recovers the sharpening factor") {
  const auto hot = fit_temperature(sharpened(2.5, 1, 10000));
  CHECK(hot.temperature >= 2.3);
  CHECK(hot.temperature <= 2.7);
  const auto calm = fit_temperature(sharpened(1.0, 2, 10000));
  CHECK(calm.temperature >= 0.95);
  CHECK(calm.temperature <= 1.05);
}

TEST_CASE("fitted temperature minimizes NLL against a grid") {
  const auto d = sharpened(1.7, 3, 3000);
  const double t = fit_temperature(d).temperature;
  const double best = temperature_nll(d, t);
  for (double g = 0.5; g <= 5.0; g += 0.01) CHECK(best <= temperature_nll(d, g) + 1e-12);
}

TEST_CASE("at the fitted temperature the NLL derivative vanishes and entropy matches NLL") {
  for (std::uint64_t seed = 10; seed < 13; ++seed) {
    const auto d = sharpened(0.6 + seed * 0.1, seed, 4000);
    const double t = fit_temperature(d).temperature;
    const double h = 1e-5;
    const double slope = (temperature_nll(d, t + h) - temperature_nll(d, t - h)) / (2 * h);
    CHECK(std::abs(slope) < 1e-4);

    Matrix p(d.size(), d.num_classes());
    for (Eigen::Index i = 0; i < d.size(); ++i) p.row(i) = softmax(d.logits().row(i).transpose() / t).transpose();
    // At the optimum, the mean entropy equals the NLL per sample.
    CHECK(std::abs(mean_entropy(p) - nll(p, d.labels()) / static_cast<double>(d.size())) < 1e-4);
  }
}

TEST_CASE("temperature scaling on uninformative labels hits the interval edge") {
  auto d = sharpened(1.0, 4, 2000);
  LabelVector y(d.size());
  synth::Stream rng(99);
  for (Eigen::Index i = 0; i < d.size(); ++i) y(i) = static_cast<int>(rng.uniform() * 10);
  const LogitDataset random_labels(d.logits(), y);
  CHECK(kind_of([&] { fit_temperature(random_labels); }) == ErrorKind::BoundaryOptimum);
}

TEST_CASE("apply temperature examples") {
  const auto base = apply(TemperatureModel{1.0}, vec({3, 1, 2}));
  const auto plain = predict(vec({3, 1, 2}));
  CHECK(base.label == plain.label);
  CHECK(base.confidence == plain.confidence);

  const auto flat = apply(TemperatureModel{1e6}, vec({1, 2, 3, 4}));
  CHECK(flat.label == 3);
  CHECK(flat.confidence == doctest::Approx(0.25).epsilon(1e-5));

  const auto half = apply(TemperatureModel{2.0}, vec({2, 0}));
  CHECK(half.confidence == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)).epsilon(1e-14));
  CHECK(half.confidence == doctest::Approx(0.731).epsilon(1e-3));
}

TEST_CASE("property: temperature scaling keeps the argmax") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 4.0);
  std::uniform_real_distribution<double> temp(0.05, 50.0);
  for (int t = 0; t < 500; ++t) {
    Vector z(6);
    for (auto& v : z) v = normal(rng);
    CHECK(apply(TemperatureModel{temp(rng)}, z).label == predict(z).label);
  }
}

TEST_CASE("affine scaling examples") {
  const auto id = AffineScalingModel::identity(3, AffineKind::Matrix);
  const Vector z = vec({0.3, -1.2, 2.0});
  CHECK(apply(id, z).label == predict(z).label);
  CHECK(apply(id, z).confidence == doctest::Approx(predict(z).confidence).epsilon(1e-15));

  for (double c : {0.5, 1.0, 2.0}) {
    auto m = AffineScalingModel::identity(3, AffineKind::Matrix);
    m.weight *= 1.0 / c;
    const auto a = apply(m, z);
    const auto b = apply(TemperatureModel{c}, z);
    CHECK(a.label == b.label);
    CHECK(std::abs(a.confidence - b.confidence) < 1e-12);
  }

  auto flip = AffineScalingModel::identity(2, AffineKind::Vector);
  flip.bias = vec({0.0, 10.0});
  CHECK(apply(flip, vec({1.0, 0.0})).label == 1);

  CHECK(kind_of([&] { apply(id, vec({1.0, 2.0})); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("flatten and unflatten are inverse") {
  for (auto kind : {AffineKind::Vector, AffineKind::Matrix}) {
    const Eigen::Index n = affine_param_count(4, kind);
    CHECK(n == (kind == AffineKind::Vector ? 8 : 20));
    Vector p(n);
    for (Eigen::Index i = 0; i < n; ++i) p(i) = 0.25 * static_cast<double>(i) - 1.0;
    CHECK(flatten(unflatten(p, 4, kind)) == p);
  }
}

TEST_CASE("affine gradient agrees with central differences") {
  const auto d = sharpened(1.3, 6, 50, 5, 1.5);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal(0.0, 0.5);
  for (auto kind : {AffineKind::Vector, AffineKind::Matrix}) {
    const auto f = affine_objective(d, kind);
    for (int t = 0; t < 5; ++t) {
      Vector p = flatten(AffineScalingModel::identity(5, kind));
      for (auto& v : p) v += normal(rng);
      CHECK(optimize::check_gradient(f, p, 1e-5) < 1e-5);
    }
  }
}

TEST_CASE("affine fits never worsen the identity NLL") {
  const auto d = sharpened(2.0, 7, 2000, 4);
  for (auto kind : {AffineKind::Vector, AffineKind::Matrix}) {
    const auto fit = fit_affine(d, kind);
    const double start = affine_nll(AffineScalingModel::identity(4, kind), d);
    CHECK(fit.mean_nll <= start);
    CHECK(affine_nll(fit.model, d) == doctest::Approx(fit.mean_nll).epsilon(1e-12));
    if (kind == AffineKind::Vector) CHECK(fit.model.weight.isDiagonal());
  }
}

TEST_CASE("vector scaling on sharpened data finds a uniform diagonal near 1/s") {
  const auto fit = fit_affine(sharpened(2.5, 8, 10000), AffineKind::Vector);
  const Vector diag = fit.model.weight.diagonal();
  const double mean = diag.mean();
  const double sd = std::sqrt((diag.array() - mean).square().mean());
  CHECK(sd / mean < 0.1);
  CHECK(std::abs(mean - 0.4) < 0.08);
}

TEST_CASE("matrix scaling warns on small samples") {
  const auto d = sharpened(1.0, 9, 200, 5);
  const auto fit = fit_affine(d, AffineKind::Matrix);
  REQUIRE(fit.warnings.size() == 1);
  CHECK(fit.warnings[0].find("overfit") != std::string::npos);
  CHECK(fit_affine(sharpened(1.0, 9, 300, 5), AffineKind::Vector).warnings.empty());
  CHECK(kind_of([] { fit_affine(sharpened(1.0, 9, 3, 5), AffineKind::Vector); }) == ErrorKind::Validation);
}

TEST_CASE("affine fit reports non-convergence on separable data") {
  Matrix z(4, 2);
  z << 1, 0, 2, 0, 0, 1, 0, 2;
  const LogitDataset d(z, ivec({0, 0, 1, 1}));
  CHECK(kind_of([&] { fit_affine(d, AffineKind::Vector, {1e-7, 200}); }) == ErrorKind::NonConvergence);
}

TEST_CASE("one-vs-all on two classes uses complementary class scores") {
  const auto d = sharpened(1.0, 11, 500, 2);
  const auto m = fit_one_vs_all(d, BinaryMethod::Histogram);
  REQUIRE(m.per_class.size() == 2);
  const auto s0 = to_one_vs_all(d, 0);
  const auto s1 = to_one_vs_all(d, 1);
  CHECK(((s0.scores() + s1.scores()).array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK((s0.outcomes() + s1.outcomes() == LabelVector::Ones(d.size())));
}

TEST_CASE("one-vs-all gives an absent class zero probability in every occupied bin") {
  Matrix z(6, 3);
  z << 2, 0, 0, 0, 2, 0, 1, 0, 0, 0, 1, 0, 3, 1, 0, 1, 3, 0;
  const LogitDataset d(z, ivec({0, 1, 0, 1, 0, 1}));
  const auto m = fit_one_vs_all(d, BinaryMethod::Histogram, {3, {}});
  const auto& absent = std::get<HistogramBinningModel>(m.per_class[2]);
  for (Eigen::Index b = 0; b < absent.thetas.size(); ++b) CHECK(absent.thetas(b) == 0.0);
}

TEST_CASE("one-vs-all isotonic models are each monotone") {
  const auto m = fit_one_vs_all(sharpened(2.0, 12, 1000, 4), BinaryMethod::Isotonic);
  for (const auto& pc : m.per_class) {
    double previous = -1.0;
    for (int i = 0; i <= 200; ++i) {
      const double q = apply(pc, i / 200.0);
      CHECK(q >= previous);
      previous = q;
    }
  }
}

TEST_CASE("one-vs-all apply normalizes and labels by the largest calibrated score") {
  // Identity maps built from Platt(1, 0) pass the softmax probabilities through unchanged.
  OneVsAllModel id{BinaryMethod::Histogram, {PlattModel{}, PlattModel{}, PlattModel{}}};
  const Vector z = vec({0.1, 1.4, -0.3});
  const auto out = apply(id, z);
  CHECK(out.label == predict(z).label);
  CHECK(out.confidence == doctest::Approx(predict(z).confidence).epsilon(1e-12));

  const HistogramBinningModel c02{vec({0, 1}), vec({0.2})};
  const HistogramBinningModel c06{vec({0, 1}), vec({0.6})};
  const OneVsAllModel fixed{BinaryMethod::Histogram, {c02, c06, c02}};
  const auto r = apply(fixed, vec({5, 0, 0}));
  CHECK(r.label == 1);
  CHECK(r.confidence == doctest::Approx(0.6));
  REQUIRE(r.full_distribution.has_value());
  CHECK(r.full_distribution->sum() == doctest::Approx(1.0));

  const HistogramBinningModel zero{vec({0, 1}), vec({0.0})};
  const OneVsAllModel dead{BinaryMethod::Histogram, {zero, zero}};
  CHECK(kind_of([&] { apply(dead, vec({1, 0})); }) == ErrorKind::ZeroMassVector);
}

TEST_CASE("one-vs-all errors name the failing class") {
  const auto d = sharpened(1.0, 13, 50, 3);
  auto msg = testing::message_of([&] { fit_one_vs_all(d, BinaryMethod::BBQ, {15, {}}); });
  CHECK(msg.empty());
  msg = testing::message_of([&] { fit_one_vs_all(d, BinaryMethod::Histogram, {0, {}}); });
  CHECK(msg.find("class 0") != std::string::npos);
}

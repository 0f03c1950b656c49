#include <doctest.h>

#include <cmath>

#include "calib/calibrator.hpp"
#include "calib/metrics.hpp"
#include "calib/synth.hpp"
#include "test_util.hpp"

using namespace calib;
using testing::kind_of;

TEST_CASE("generators are deterministic in the seed") {
  const synth::SynthSpec spec{500, 7, 2.0, 1.5, 42};
  const auto a = synth::gen_sharpened(spec);
  const auto b = synth::gen_sharpened(spec);
  CHECK(a.logits() == b.logits());
  CHECK(a.labels() == b.labels());
  auto other = spec;
  other.seed = 43;
  CHECK(synth::gen_sharpened(other).logits() != a.logits());

  const auto s1 = synth::gen_binary(300, 0.1, 8);
  const auto s2 = synth::gen_binary(300, 0.1, 8);
  CHECK(s1.scores() == s2.scores());
  CHECK(s1.outcomes() == s2.outcomes());
}

TEST_CASE("the random stream stays in range and has the expected moments") {
  synth::Stream rng(1);
  double sum = 0.0;
  double sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK_MESSAGE((u >= 0.0 && u < 1.0), u);
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("spec validation") {
  CHECK(kind_of([] { synth::validate({0, 3, 1.0, 1.0, 0}); }) == ErrorKind::Validation);
  CHECK(kind_of([] { synth::validate({10, 1, 1.0, 1.0, 0}); }) == ErrorKind::Validation);
  CHECK(kind_of([] { synth::validate({10, 3, 0.0, 1.0, 0}); }) == ErrorKind::Validation);
  CHECK(kind_of([] { synth::validate({10, 3, 1.0, -1.0, 0}); }) == ErrorKind::Validation);
  CHECK(kind_of([] { synth::gen_binary(10, 0.7, 0); }) == ErrorKind::Validation);
  const auto one = synth::gen_sharpened({1, 3, 1.0, 1.0, 0});
  CHECK(one.size() == 1);
  CHECK(one.num_classes() == 3);
}

TEST_CASE("unsharpened data is already calibrated") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const double t = std::get<TemperatureModel>(fit(Method::Temperature, synth::gen_sharpened({5000, 10, 1.0, 2.0, seed})).model).temperature;
    CHECK(std::abs(t - 1.0) < 0.1);
  }
  const auto big = synth::gen_sharpened({100000, 10, 1.0, 2.0, 77});
  CHECK(evaluate(big).ece < 0.01);
}

TEST_CASE("sharpened data is overconfident") {
  const auto d = synth::gen_sharpened({20000, 10, 2.5, 2.0, 5});
  const auto r = evaluate(d);
  double gap = 0.0;
  for (const auto& b : r.histogram.bins) {
    if (b.count) gap += static_cast<double>(b.count) * (*b.mean_confidence - *b.accuracy);
  }
  CHECK(gap / static_cast<double>(d.size()) > 0.05);
}

TEST_CASE("temperature fitted on one draw reduces ECE on a fresh draw") {
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto train = synth::gen_sharpened({5000, 10, 2.5, 2.0, 2 * seed});
    const auto test = synth::gen_sharpened({5000, 10, 2.5, 2.0, 2 * seed + 1});
    const auto model = fit(Method::Temperature, train).model;
    const double before = evaluate(test).ece;
    const auto p = calib::apply(model, test.logits());
    const double after = evaluate(p, test.labels()).ece;
    if (after <= 0.5 * before) ++improved;
  }
  CHECK(improved >= 9);
}

TEST_CASE("binary generator with zero noise yields calibrated scores") {
  const auto s = synth::gen_binary(100000, 0.0, 3);
  const auto h = fit_histogram(s, 10, BinningMode::EqualWidth);
  for (Eigen::Index b = 0; b < 10; ++b) {
    const double mid = 0.5 * (h.boundaries(b) + h.boundaries(b + 1));
    CHECK(std::abs(h.thetas(b) - mid) < 0.02);
  }
}

#include "calib/binary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

namespace calib {
namespace {

constexpr double kScoreClamp = 1e-12;
constexpr int kPlattMaxSteps = 500;
constexpr double kPlattGradTol = 1e-9;

void require_nonempty(const BinaryCalibrationSet& s, const char* what) {
  if (s.size() == 0) throw Error(ErrorKind::EmptyInput, std::string(what) + ": no samples");
}

void check_score(double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error(ErrorKind::Validation, "score " + format_double(score) + " not in [0, 1]");
  }
}

std::vector<Eigen::Index> sorted_order(const Vector& scores) {
  std::vector<Eigen::Index> order(scores.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return scores(i) < scores(j); });
  return order;
}

struct Block {
  double sum = 0.0;
  double weight = 0.0;
  Eigen::Index first = 0;  // index of first pooled point
  Eigen::Index last = 0;

  double value() const { return sum / weight; }
};

std::vector<Block> pava_blocks(const Eigen::Ref<const Vector>& values, const Eigen::Ref<const Vector>& weights) {
  std::vector<Block> stack;
  stack.reserve(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    stack.push_back({weights(i) * values(i), weights(i), i, i});
    while (stack.size() > 1 && stack[stack.size() - 2].value() >= stack.back().value()) {
      Block top = stack.back();
      stack.pop_back();
      auto& below = stack.back();
      below.sum += top.sum;
      below.weight += top.weight;
      below.last = top.last;
    }
  }
  return stack;
}

double lbeta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

}  // namespace

Vector equal_width_boundaries(int m_bins) {
  if (m_bins < 1) throw Error(ErrorKind::ZeroBins, "binning: bin count must be positive");
  Vector b(m_bins + 1);
  for (int m = 0; m <= m_bins; ++m) b(m) = static_cast<double>(m) / m_bins;
  return b;
}

Vector equal_frequency_boundaries(const Eigen::Ref<const Vector>& scores, int m_bins) {
  if (m_bins < 1) throw Error(ErrorKind::ZeroBins, "binning: bin count must be positive");
  if (scores.size() == 0) throw Error(ErrorKind::EmptyInput, "binning: no samples");
  std::vector<double> sorted(scores.data(), scores.data() + scores.size());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<Eigen::Index>(sorted.size());

  Vector b(m_bins + 1);
  b(0) = 0.0;
  b(m_bins) = 1.0;
  for (int m = 1; m < m_bins; ++m) {
    const Eigen::Index j = m * n / m_bins;
    b(m) = j == 0 ? 0.0 : 0.5 * (sorted[j - 1] + sorted[j]);
  }
  return b;
}

int find_bin(const Vector& boundaries, double score) {
  const auto m_bins = boundaries.size() - 1;
  const double* interior_begin = boundaries.data() + 1;
  const double* interior_end = boundaries.data() + m_bins;
  return static_cast<int>(std::upper_bound(interior_begin, interior_end, score) - interior_begin);
}

HistogramBinningModel fit_histogram(const BinaryCalibrationSet& s, int m_bins, BinningMode mode) {
  if (m_bins < 1) throw Error(ErrorKind::ZeroBins, "histogram binning: bin count must be positive");
  require_nonempty(s, "histogram binning");

  HistogramBinningModel model;
  model.boundaries =
      mode == BinningMode::EqualWidth ? equal_width_boundaries(m_bins) : equal_frequency_boundaries(s.scores(), m_bins);

  std::vector<Eigen::Index> count(m_bins, 0);
  std::vector<Eigen::Index> positives(m_bins, 0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const int m = find_bin(model.boundaries, s.scores()(i));
    ++count[m];
    positives[m] += s.outcomes()(i);
  }
  model.thetas.resize(m_bins);
  for (int m = 0; m < m_bins; ++m) {
    model.thetas(m) = count[m] == 0 ? 0.5 * (model.boundaries(m) + model.boundaries(m + 1))
                                    : static_cast<double>(positives[m]) / static_cast<double>(count[m]);
  }
  return model;
}

Vector pava(const Eigen::Ref<const Vector>& values, const Eigen::Ref<const Vector>& weights) {
  if (values.size() != weights.size()) throw Error(ErrorKind::LengthMismatch, "pava: values and weights differ");
  Vector fitted(values.size());
  for (const auto& block : pava_blocks(values, weights)) {
    fitted.segment(block.first, block.last - block.first + 1).setConstant(block.value());
  }
  return fitted;
}

IsotonicModel fit_isotonic(const BinaryCalibrationSet& s) {
  require_nonempty(s, "isotonic regression");
  const auto order = sorted_order(s.scores());

  // Pool tied scores into single weighted points.
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> ws;
  for (auto i : order) {
    const double x = s.scores()(i);
    const double y = s.outcomes()(i);
    if (!xs.empty() && xs.back() == x) {
      ys.back() += y;
      ws.back() += 1.0;
    } else {
      xs.push_back(x);
      ys.push_back(y);
      ws.push_back(1.0);
    }
  }
  const auto points = static_cast<Eigen::Index>(xs.size());
  Vector means(points);
  Vector weights = Eigen::Map<Vector>(ws.data(), points);
  for (Eigen::Index j = 0; j < points; ++j) means(j) = ys[j] / ws[j];

  const auto blocks = pava_blocks(means, weights);
  IsotonicModel model;
  model.breakpoints.resize(static_cast<Eigen::Index>(blocks.size()));
  model.values.resize(static_cast<Eigen::Index>(blocks.size()));
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    model.breakpoints(j) = xs[blocks[j].first];
    model.values(j) = blocks[j].value();
  }
  return model;
}

std::vector<int> default_bbq_candidates(Eigen::Index n) {
  const int top = 3 * static_cast<int>(std::ceil(std::cbrt(static_cast<double>(std::max<Eigen::Index>(n, 1)))));
  std::vector<int> candidates(top);
  std::iota(candidates.begin(), candidates.end(), 1);
  return candidates;
}

BBQModel fit_bbq(const BinaryCalibrationSet& s, const std::vector<int>& candidate_bin_counts, BetaPrior prior) {
  require_nonempty(s, "BBQ");
  if (candidate_bin_counts.empty()) throw Error(ErrorKind::EmptyCandidateList, "BBQ: no candidate bin counts");
  if (!(prior.alpha > 0.0 && prior.beta > 0.0)) throw Error(ErrorKind::Validation, "BBQ: prior must be positive");

  BBQModel model;
  const double prior_lbeta = lbeta(prior.alpha, prior.beta);
  for (int m_bins : candidate_bin_counts) {
    BinningScheme scheme;
    scheme.boundaries = equal_frequency_boundaries(s.scores(), m_bins);
    Vector positives = Vector::Zero(m_bins);
    Vector negatives = Vector::Zero(m_bins);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const int m = find_bin(scheme.boundaries, s.scores()(i));
      (s.outcomes()(i) ? positives : negatives)(m) += 1.0;
    }
    scheme.alphas = positives.array() + prior.alpha;
    scheme.betas = negatives.array() + prior.beta;
    for (int m = 0; m < m_bins; ++m) {
      scheme.log_marginal_likelihood += lbeta(scheme.alphas(m), scheme.betas(m)) - prior_lbeta;
    }
    model.schemes.push_back(std::move(scheme));
  }

  model.log_weights.resize(static_cast<Eigen::Index>(model.schemes.size()));
  for (std::size_t j = 0; j < model.schemes.size(); ++j) {
    model.log_weights(j) = model.schemes[j].log_marginal_likelihood;
  }
  model.log_weights.array() -= log_sum_exp(model.log_weights);
  return model;
}

double score_logit(double p) {
  const double q = std::clamp(p, kScoreClamp, 1.0 - kScoreClamp);
  return std::log(q) - std::log1p(-q);
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

PlattModel fit_platt(const BinaryCalibrationSet& s, const std::optional<Vector>& logits) {
  const auto n = s.size();
  const auto pos = s.positives();
  if (n < 2 || pos == 0 || pos == n) {
    throw Error(ErrorKind::DegenerateLabels, "Platt scaling: need at least one positive and one negative outcome");
  }
  Vector z(n);
  if (logits) {
    if (logits->size() != n) throw Error(ErrorKind::LengthMismatch, "Platt scaling: logits and scores differ");
    if (!all_finite(*logits)) throw Error(ErrorKind::NonFiniteInput, "Platt scaling: non-finite logit");
    z = *logits;
  } else {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = score_logit(s.scores()(i));
  }
  // No finite optimum when some threshold on z separates the classes.
  double max_negative = -std::numeric_limits<double>::infinity();
  double min_positive = std::numeric_limits<double>::infinity();
  double max_positive = -std::numeric_limits<double>::infinity();
  double min_negative = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (s.outcomes()(i)) {
      min_positive = std::min(min_positive, z(i));
      max_positive = std::max(max_positive, z(i));
    } else {
      max_negative = std::max(max_negative, z(i));
      min_negative = std::min(min_negative, z(i));
    }
  }
  if (max_negative < min_positive || max_positive < min_negative) {
    throw Error(ErrorKind::NonConvergence, "Platt scaling: outcomes are separable by score; no finite optimum");
  }

  const Vector y = s.outcomes().cast<double>();
  const double inv_n = 1.0 / static_cast<double>(n);

  // Mean binary NLL of sigmoid(a z + b) = softplus(t) - y t, with gradient and Hessian.
  auto evaluate = [&](double a, double b, Eigen::Vector2d* grad, Eigen::Matrix2d* hess) {
    double value = 0.0;
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = a * z(i) + b;
      value += std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))) - y(i) * t;
      if (!grad) continue;
      const double q = sigmoid(t);
      const double w = q * (1.0 - q);
      g += (q - y(i)) * Eigen::Vector2d(z(i), 1.0);
      h(0, 0) += w * z(i) * z(i);
      h(0, 1) += w * z(i);
      h(1, 1) += w;
    }
    if (grad) *grad = g * inv_n;
    if (hess) {
      h(1, 0) = h(0, 1);
      *hess = h * inv_n;
    }
    return value * inv_n;
  };

  // Damped Newton; falls back to the gradient when the Hessian is numerically singular.
  Eigen::Vector2d p(1.0, 0.0);
  Eigen::Vector2d grad;
  Eigen::Matrix2d hess;
  double value = evaluate(p(0), p(1), &grad, &hess);
  for (int step = 0;; ++step) {
    if (grad.cwiseAbs().maxCoeff() < kPlattGradTol) return {p(0), p(1)};
    if (step >= kPlattMaxSteps) break;
    Eigen::Vector2d dir = -grad;
    if (hess.determinant() > 1e-12 * hess(0, 0) * hess(1, 1)) dir = -hess.ldlt().solve(grad);
    const double slope = grad.dot(dir);
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h < 60; ++h, t *= 0.5) {
      const Eigen::Vector2d trial = p + t * dir;
      if (trial == p) break;
      const double v = evaluate(trial(0), trial(1), nullptr, nullptr);
      if (std::isfinite(v) && v <= value + 1e-4 * t * slope) {
        p = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    value = evaluate(p(0), p(1), &grad, &hess);
  }
  throw Error(ErrorKind::NonConvergence,
              "Platt scaling: gradient max-norm " + format_double(grad.cwiseAbs().maxCoeff()) +
                  " still above tolerance after Newton iterations");
}

double apply(const HistogramBinningModel& m, double score) {
  if (m.thetas.size() == 0 || m.boundaries.size() != m.thetas.size() + 1) {
    throw Error(ErrorKind::UnfittedModel, "histogram binning: model is not fitted");
  }
  check_score(score);
  return m.thetas(find_bin(m.boundaries, score));
}

double apply(const IsotonicModel& m, double score) {
  if (m.values.size() == 0 || m.breakpoints.size() != m.values.size()) {
    throw Error(ErrorKind::UnfittedModel, "isotonic regression: model is not fitted");
  }
  check_score(score);
  const double* begin = m.breakpoints.data();
  const auto above = std::upper_bound(begin, begin + m.breakpoints.size(), score) - begin;
  return m.values(std::max<Eigen::Index>(above - 1, 0));
}

double apply(const BBQModel& m, double score) {
  if (m.schemes.empty() || m.log_weights.size() != static_cast<Eigen::Index>(m.schemes.size())) {
    throw Error(ErrorKind::UnfittedModel, "BBQ: model is not fitted");
  }
  check_score(score);
  double q = 0.0;
  for (std::size_t j = 0; j < m.schemes.size(); ++j) {
    const auto& scheme = m.schemes[j];
    const int bin = find_bin(scheme.boundaries, score);
    q += std::exp(m.log_weights(j)) * scheme.alphas(bin) / (scheme.alphas(bin) + scheme.betas(bin));
  }
  return std::clamp(q, 0.0, 1.0);
}

double apply(const PlattModel& m, double score, std::optional<double> logit) {
  if (!std::isfinite(m.a) || !std::isfinite(m.b)) throw Error(ErrorKind::UnfittedModel, "Platt scaling: bad parameters");
  if (logit) {
    if (!std::isfinite(*logit)) throw Error(ErrorKind::NonFiniteInput, "Platt scaling: non-finite logit");
    return sigmoid(m.a * *logit + m.b);
  }
  check_score(score);
  return sigmoid(m.a * score_logit(score) + m.b);
}

double apply(const BinaryModel& m, double score, std::optional<double> logit) {
  return std::visit(
      [&](const auto& model) {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, PlattModel>) {
          return apply(model, score, logit);
        } else {
          return apply(model, score);
        }
      },
      m);
}

}  // namespace calib

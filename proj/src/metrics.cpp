#include "calib/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace calib {

Eigen::Index ReliabilityHistogram::total() const {
  Eigen::Index n = 0;
  for (const auto& b : bins) n += b.count;
  return n;
}

int bin_index(double confidence, int m_bins) {
  const double m_real = static_cast<double>(m_bins);
  int m = static_cast<int>(std::ceil(confidence * m_real));
  m = std::clamp(m, 1, m_bins);
  // confidence * M can round across a boundary; settle against the same bounds the table reports.
  while (m > 1 && confidence <= static_cast<double>(m - 1) / m_real) --m;
  while (m < m_bins && confidence > static_cast<double>(m) / m_real) ++m;
  return m;
}

ReliabilityHistogram build_histogram(const Eigen::Ref<const Vector>& confidences, const Mask& correct, int m_bins) {
  if (m_bins < 1) throw Error(ErrorKind::ZeroBins, "histogram: bin count must be positive");
  if (confidences.size() != correct.size()) {
    throw Error(ErrorKind::LengthMismatch, "histogram: confidences and correctness flags differ in length");
  }
  if (confidences.size() == 0) throw Error(ErrorKind::EmptyInput, "histogram: no samples");

  std::vector<double> conf_sum(m_bins, 0.0);
  std::vector<Eigen::Index> hits(m_bins, 0);
  ReliabilityHistogram h{m_bins, std::vector<ReliabilityBin>(m_bins)};
  for (int m = 0; m < m_bins; ++m) {
    h.bins[m].lower = static_cast<double>(m) / m_bins;
    h.bins[m].upper = static_cast<double>(m + 1) / m_bins;
  }
  for (Eigen::Index i = 0; i < confidences.size(); ++i) {
    const double c = confidences(i);
    if (!(c >= 0.0 && c <= 1.0)) {
      throw Error(ErrorKind::Validation, "histogram: confidence at row " + std::to_string(i + 1) + " not in [0, 1]");
    }
    const int m = bin_index(c, m_bins) - 1;
    h.bins[m].count += 1;
    conf_sum[m] += c;
    hits[m] += correct(i) ? 1 : 0;
  }
  for (int m = 0; m < m_bins; ++m) {
    auto& b = h.bins[m];
    if (b.count == 0) continue;
    b.accuracy = static_cast<double>(hits[m]) / static_cast<double>(b.count);
    b.mean_confidence = conf_sum[m] / static_cast<double>(b.count);
  }
  return h;
}

double ece(const ReliabilityHistogram& h, Eigen::Index n) {
  if (n != h.total()) {
    throw Error(ErrorKind::CountMismatch,
                "ece: n = " + std::to_string(n) + " but histogram holds " + std::to_string(h.total()));
  }
  double total = 0.0;
  for (const auto& b : h.bins) {
    if (b.count == 0) continue;
    total += static_cast<double>(b.count) / static_cast<double>(n) * std::abs(*b.accuracy - *b.mean_confidence);
  }
  return total;
}

double mce(const ReliabilityHistogram& h) {
  std::optional<double> worst;
  for (const auto& b : h.bins) {
    if (b.count == 0) continue;
    const double gap = std::abs(*b.accuracy - *b.mean_confidence);
    worst = std::max(worst.value_or(gap), gap);
  }
  if (!worst) throw Error(ErrorKind::AllBinsEmpty, "mce: every bin is empty");
  return *worst;
}

double nll(const Eigen::Ref<const Matrix>& probs, const LabelVector& labels) {
  if (probs.rows() != labels.size()) throw Error(ErrorKind::LengthMismatch, "nll: rows and labels differ in length");
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const int y = labels(i);
    if (y < 0 || y >= probs.cols()) {
      throw Error(ErrorKind::LabelOutOfRange, "nll: label " + std::to_string(y) + " at row " + std::to_string(i + 1));
    }
    total -= std::log(std::max(probs(i, y), kProbabilityFloor));
  }
  return total;
}

double mean_entropy(const Eigen::Ref<const Matrix>& probs) {
  if (probs.rows() == 0) throw Error(ErrorKind::EmptyInput, "mean_entropy: no samples");
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    for (Eigen::Index k = 0; k < probs.cols(); ++k) {
      const double q = probs(i, k);
      if (q > 0.0) total -= q * std::log(q);
    }
  }
  return total / static_cast<double>(probs.rows());
}

MetricsReport evaluate(const Predictions& predictions, const LabelVector& labels, int m_bins) {
  const auto n = labels.size();
  if (predictions.labels.size() != n || predictions.confidences.size() != n || predictions.probs.rows() != n) {
    throw Error(ErrorKind::LengthMismatch, "evaluate: predictions and labels differ in length");
  }
  const Mask correct = (predictions.labels.array() == labels.array()).matrix();

  MetricsReport r;
  r.histogram = build_histogram(predictions.confidences, correct, m_bins);
  r.ece = ece(r.histogram, n);
  r.mce = mce(r.histogram);
  r.nll = nll(predictions.probs, labels);
  r.error_rate = static_cast<double>(n - correct.count()) / static_cast<double>(n);
  r.mean_entropy = mean_entropy(predictions.probs);
  return r;
}

MetricsReport evaluate(const LogitDataset& d, int m_bins) { return evaluate(predict_all(d), d.labels(), m_bins); }

std::string reliability_table_csv(const ReliabilityHistogram& h) {
  std::ostringstream out;
  out << "bin_lower,bin_upper,count,accuracy,mean_confidence\n";
  for (const auto& b : h.bins) {
    out << format_double(b.lower) << ',' << format_double(b.upper) << ',' << b.count << ',';
    if (b.accuracy) out << format_double(*b.accuracy);
    out << ',';
    if (b.mean_confidence) out << format_double(*b.mean_confidence);
    out << '\n';
  }
  return out.str();
}

}  // namespace calib

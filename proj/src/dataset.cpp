#include "calib/dataset.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

namespace calib {
namespace {

std::string cell_name(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row + 1) + ", column " + std::to_string(col + 1);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  // A trailing newline does not start a new row.
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

double parse_real(std::string_view cell, std::size_t row, std::size_t col) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw Error(ErrorKind::Format, "logits: non-numeric cell at " + cell_name(row, col) + ": '" +
                                       std::string(cell) + "'");
  }
  if (!std::isfinite(value)) {
    throw Error(ErrorKind::Validation, "logits: non-finite value at " + cell_name(row, col));
  }
  return value;
}

int parse_label(std::string_view cell, std::size_t row) {
  cell = trim(cell);
  int value = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw Error(ErrorKind::Format, "labels: non-integer value at row " + std::to_string(row + 1) + ": '" +
                                       std::string(cell) + "'");
  }
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "cannot read '" + path.string() + "'");
  return ss.str();
}

}  // namespace

LogitDataset::LogitDataset(Matrix logits, LabelVector labels)
    : logits_(std::move(logits)), labels_(std::move(labels)) {
  if (logits_.rows() < 1) throw Error(ErrorKind::EmptyInput, "dataset: need at least one sample");
  if (logits_.cols() < 2) throw Error(ErrorKind::Validation, "dataset: need at least two classes");
  if (labels_.size() != logits_.rows()) {
    throw Error(ErrorKind::LengthMismatch, "dataset: " + std::to_string(logits_.rows()) + " logit rows but " +
                                               std::to_string(labels_.size()) + " labels");
  }
  for (Eigen::Index i = 0; i < logits_.rows(); ++i) {
    for (Eigen::Index k = 0; k < logits_.cols(); ++k) {
      if (!std::isfinite(logits_(i, k))) {
        throw Error(ErrorKind::Validation, "logits: non-finite value at " + cell_name(i, k));
      }
    }
    if (labels_(i) < 0 || labels_(i) >= logits_.cols()) {
      throw Error(ErrorKind::Validation, "labels: value " + std::to_string(labels_(i)) + " at row " +
                                             std::to_string(i + 1) + " outside [0, " +
                                             std::to_string(logits_.cols()) + ")");
    }
  }
}

BinaryCalibrationSet::BinaryCalibrationSet(Vector scores, LabelVector outcomes)
    : scores_(std::move(scores)), outcomes_(std::move(outcomes)) {
  if (scores_.size() != outcomes_.size()) {
    throw Error(ErrorKind::LengthMismatch, "binary set: scores and outcomes differ in length");
  }
  for (Eigen::Index i = 0; i < scores_.size(); ++i) {
    if (!(scores_(i) >= 0.0 && scores_(i) <= 1.0)) {
      throw Error(ErrorKind::Validation, "binary set: score at row " + std::to_string(i + 1) + " not in [0, 1]");
    }
    if (outcomes_(i) != 0 && outcomes_(i) != 1) {
      throw Error(ErrorKind::Validation, "binary set: outcome at row " + std::to_string(i + 1) + " not 0/1");
    }
  }
}

Prediction predict(const Eigen::Ref<const Vector>& z) {
  const Vector p = softmax(z);
  const int label = argmax(z);
  return {label, p(label)};
}

Predictions predict_all(const LogitDataset& d) {
  Predictions out{LabelVector(d.size()), Vector(d.size()), softmax_rows(d.logits())};
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    out.labels(i) = argmax(d.logits().row(i));
    out.confidences(i) = out.probs(i, out.labels(i));
  }
  return out;
}

BinaryCalibrationSet to_one_vs_all(const LogitDataset& d, int k) {
  if (k < 0 || k >= d.num_classes()) {
    throw Error(ErrorKind::IndexOutOfRange,
                "class index " + std::to_string(k) + " outside [0, " + std::to_string(d.num_classes()) + ")");
  }
  const Matrix probs = softmax_rows(d.logits());
  LabelVector outcomes = (d.labels().array() == k).cast<int>();
  return {probs.col(k), std::move(outcomes)};
}

Matrix parse_logit_matrix(const std::string& logits_csv) {
  const auto rows = split_lines(logits_csv);
  if (rows.empty()) throw Error(ErrorKind::Format, "logits: file is empty");

  std::vector<std::vector<double>> values;
  values.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<double> row;
    std::string_view line = rows[r];
    std::size_t col = 0;
    while (true) {
      auto comma = line.find(',');
      row.push_back(parse_real(line.substr(0, comma), r, col++));
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (!values.empty() && row.size() != values.front().size()) {
      throw Error(ErrorKind::Format, "logits: ragged row " + std::to_string(r + 1) + " has " +
                                         std::to_string(row.size()) + " columns, expected " +
                                         std::to_string(values.front().size()));
    }
    values.push_back(std::move(row));
  }

  Matrix logits(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.front().size()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    for (Eigen::Index j = 0; j < logits.cols(); ++j) logits(i, j) = values[i][j];
  }
  return logits;
}

LogitDataset parse_logits(const std::string& logits_csv, const std::string& labels_csv) {
  Matrix logits = parse_logit_matrix(logits_csv);
  const auto label_rows = split_lines(labels_csv);
  if (static_cast<Eigen::Index>(label_rows.size()) != logits.rows()) {
    throw Error(ErrorKind::Format, "labels: " + std::to_string(label_rows.size()) + " rows but logits has " +
                                       std::to_string(logits.rows()));
  }
  LabelVector labels(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) labels(i) = parse_label(label_rows[i], i);
  return {std::move(logits), std::move(labels)};
}

Matrix load_logit_matrix(const std::filesystem::path& logits_path) {
  return parse_logit_matrix(read_file(logits_path));
}

LogitDataset load_logits(const std::filesystem::path& logits_path, const std::filesystem::path& labels_path) {
  return parse_logits(read_file(logits_path), read_file(labels_path));
}

void save_logits(const LogitDataset& d, const std::filesystem::path& logits_path,
                 const std::filesystem::path& labels_path) {
  std::ofstream lo(logits_path, std::ios::binary);
  if (!lo) throw Error(ErrorKind::Io, "cannot write '" + logits_path.string() + "'");
  std::ofstream la(labels_path, std::ios::binary);
  if (!la) throw Error(ErrorKind::Io, "cannot write '" + labels_path.string() + "'");
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    for (Eigen::Index k = 0; k < d.num_classes(); ++k) {
      if (k) lo << ',';
      lo << format_double(d.logits()(i, k));
    }
    lo << '\n';
    la << d.labels()(i) << '\n';
  }
}

std::string format_double(double x) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

}  // namespace calib

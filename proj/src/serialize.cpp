#include "calib/serialize.hpp"

#include <fstream>

namespace calib {
namespace {

Json to_array(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json to_rows(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_array(m.row(r).transpose()));
  return rows;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::Schema, std::string("model JSON: missing field '") + key + "'");
  }
  return j.at(key);
}

double number(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) throw Error(ErrorKind::Schema, std::string("model JSON: '") + key + "' must be a number");
  return v.get<double>();
}

Vector vector_field(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_array()) throw Error(ErrorKind::Schema, std::string("model JSON: '") + key + "' must be an array");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw Error(ErrorKind::Schema, std::string("model JSON: '") + key + "' holds a non-number");
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

Matrix matrix_field(const Json& j, const char* key) {
  const auto& rows = field(j, key);
  if (!rows.is_array() || rows.empty()) {
    throw Error(ErrorKind::Schema, std::string("model JSON: '") + key + "' must be a nonempty array of rows");
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix out(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw Error(ErrorKind::Schema, std::string("model JSON: '") + key + "' must be square");
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      const auto& cell = row[static_cast<std::size_t>(c)];
      if (!cell.is_number()) throw Error(ErrorKind::Schema, "model JSON: weight holds a non-number");
      out(r, c) = cell.get<double>();
    }
  }
  return out;
}

std::string method_of(const Json& j) {
  const auto& m = field(j, "method");
  if (!m.is_string()) throw Error(ErrorKind::Schema, "model JSON: 'method' must be a string");
  return m.get<std::string>();
}

std::string_view binary_method_name(BinaryMethod m) {
  switch (m) {
    case BinaryMethod::Histogram: return "histogram";
    case BinaryMethod::Isotonic: return "isotonic";
    case BinaryMethod::BBQ: return "bbq";
  }
  return "unknown";
}

}  // namespace

Json to_json(const BinaryModel& m) {
  return std::visit(
      [](const auto& model) -> Json {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, HistogramBinningModel>) {
          return {{"method", "histogram"}, {"boundaries", to_array(model.boundaries)}, {"thetas", to_array(model.thetas)}};
        } else if constexpr (std::is_same_v<T, IsotonicModel>) {
          return {{"method", "isotonic"}, {"breakpoints", to_array(model.breakpoints)}, {"values", to_array(model.values)}};
        } else if constexpr (std::is_same_v<T, BBQModel>) {
          Json schemes = Json::array();
          for (const auto& s : model.schemes) {
            schemes.push_back({{"boundaries", to_array(s.boundaries)},
                               {"alphas", to_array(s.alphas)},
                               {"betas", to_array(s.betas)},
                               {"log_marginal_likelihood", s.log_marginal_likelihood}});
          }
          return {{"method", "bbq"}, {"schemes", schemes}, {"log_weights", to_array(model.log_weights)}};
        } else {
          return {{"method", "platt"}, {"a", model.a}, {"b", model.b}};
        }
      },
      m);
}

Json to_json(const Calibrator& c) {
  return std::visit(
      [](const auto& model) -> Json {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, TemperatureModel>) {
          return {{"method", "temperature"}, {"temperature", model.temperature}};
        } else if constexpr (std::is_same_v<T, AffineScalingModel>) {
          return {{"method", model.kind == AffineKind::Vector ? "vector" : "matrix"},
                  {"weight", to_rows(model.weight)},
                  {"bias", to_array(model.bias)}};
        } else if constexpr (std::is_same_v<T, OneVsAllModel>) {
          Json per_class = Json::array();
          for (const auto& m : model.per_class) per_class.push_back(to_json(m));
          return {{"method", "ova_" + std::string(binary_method_name(model.method))}, {"per_class", per_class}};
        } else {
          return to_json(BinaryModel(model));
        }
      },
      c);
}

BinaryModel binary_model_from_json(const Json& j) {
  const auto method = method_of(j);
  if (method == "histogram") {
    HistogramBinningModel m{vector_field(j, "boundaries"), vector_field(j, "thetas")};
    if (m.thetas.size() == 0 || m.boundaries.size() != m.thetas.size() + 1) {
      throw Error(ErrorKind::Schema, "model JSON: histogram needs M + 1 boundaries for M thetas");
    }
    return m;
  }
  if (method == "isotonic") {
    IsotonicModel m{vector_field(j, "breakpoints"), vector_field(j, "values")};
    if (m.values.size() == 0 || m.breakpoints.size() != m.values.size()) {
      throw Error(ErrorKind::Schema, "model JSON: isotonic needs one breakpoint per value");
    }
    return m;
  }
  if (method == "bbq") {
    BBQModel m;
    const auto& schemes = field(j, "schemes");
    if (!schemes.is_array()) throw Error(ErrorKind::Schema, "model JSON: 'schemes' must be an array");
    for (const auto& s : schemes) {
      BinningScheme scheme{vector_field(s, "boundaries"), vector_field(s, "alphas"), vector_field(s, "betas"),
                           number(s, "log_marginal_likelihood")};
      const auto bins = scheme.alphas.size();
      if (bins == 0 || scheme.betas.size() != bins || scheme.boundaries.size() != bins + 1) {
        throw Error(ErrorKind::Schema, "model JSON: inconsistent BBQ scheme sizes");
      }
      m.schemes.push_back(std::move(scheme));
    }
    m.log_weights = vector_field(j, "log_weights");
    if (m.log_weights.size() != static_cast<Eigen::Index>(m.schemes.size()) || m.schemes.empty()) {
      throw Error(ErrorKind::Schema, "model JSON: one log weight per BBQ scheme required");
    }
    return m;
  }
  if (method == "platt") return PlattModel{number(j, "a"), number(j, "b")};
  throw Error(ErrorKind::Schema, "model JSON: unknown binary method '" + method + "'");
}

Calibrator calibrator_from_json(const Json& j) {
  const auto method = method_of(j);
  if (method == "temperature") {
    const double t = number(j, "temperature");
    if (!(t > 0.0)) throw Error(ErrorKind::Schema, "model JSON: temperature must be positive");
    return TemperatureModel{t};
  }
  if (method == "vector" || method == "matrix") {
    AffineScalingModel m{matrix_field(j, "weight"), vector_field(j, "bias"),
                         method == "vector" ? AffineKind::Vector : AffineKind::Matrix};
    if (m.bias.size() != m.weight.rows()) throw Error(ErrorKind::Schema, "model JSON: bias length differs from K");
    if (m.kind == AffineKind::Vector) {
      Matrix off = m.weight;
      off.diagonal().setZero();
      if (!off.isZero(0.0)) throw Error(ErrorKind::Schema, "model JSON: vector scaling weight must be diagonal");
    }
    return m;
  }
  if (method.rfind("ova_", 0) == 0) {
    const auto inner = method.substr(4);
    OneVsAllModel m;
    if (inner == "histogram") {
      m.method = BinaryMethod::Histogram;
    } else if (inner == "isotonic") {
      m.method = BinaryMethod::Isotonic;
    } else if (inner == "bbq") {
      m.method = BinaryMethod::BBQ;
    } else {
      throw Error(ErrorKind::Schema, "model JSON: unknown one-vs-all method '" + method + "'");
    }
    const auto& per_class = field(j, "per_class");
    if (!per_class.is_array() || per_class.size() < 2) {
      throw Error(ErrorKind::Schema, "model JSON: 'per_class' must list at least two calibrators");
    }
    for (const auto& c : per_class) {
      if (method_of(c) != inner) throw Error(ErrorKind::Schema, "model JSON: one-vs-all calibrators must share a method");
      m.per_class.push_back(binary_model_from_json(c));
    }
    return m;
  }
  return std::visit([](auto&& m) -> Calibrator { return std::move(m); }, binary_model_from_json(j));
}

Json to_json(const MetricsReport& r) {
  return {{"ece", r.ece},
          {"mce", r.mce},
          {"nll", r.nll},
          {"error_rate", r.error_rate},
          {"mean_entropy", r.mean_entropy},
          {"m_bins", r.histogram.m_bins}};
}

void save_model(const Calibrator& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << to_json(c).dump(2) << '\n';
}

Calibrator load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::Schema, "model JSON: " + std::string(e.what()));
  }
  return calibrator_from_json(j);
}

}  // namespace calib

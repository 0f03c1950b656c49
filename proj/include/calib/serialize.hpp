#pragma once

#include <filesystem>

#include "calib/calibrator.hpp"
#include "calib/metrics.hpp"
#include "json.hpp"

namespace calib {

using Json = nlohmann::json;

/// Model JSON keyed by a `method` discriminator. Doubles are written in shortest round-trip form.
Json to_json(const Calibrator& c);
Json to_json(const BinaryModel& m);

/// Throws SchemaError on an unknown method or missing/ill-typed fields.
Calibrator calibrator_from_json(const Json& j);
BinaryModel binary_model_from_json(const Json& j);

/// `{ece, mce, nll, error_rate, mean_entropy, m_bins}`.
Json to_json(const MetricsReport& r);

void save_model(const Calibrator& c, const std::filesystem::path& path);
Calibrator load_model(const std::filesystem::path& path);

}  // namespace calib

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace calib::cli {

enum class Subcommand { Fit, Apply, Eval, Report, Synth };

struct CliConfig {
  Subcommand subcommand = Subcommand::Eval;
  std::string method;
  std::string logits;
  std::string labels;
  std::string model;
  std::string out;
  int m_bins = 15;
  std::optional<std::uint64_t> seed;
  bool full = false;
  // synth only
  long long n = 10000;
  long long classes = 10;
  double sharpening = 1.0;
  double logit_scale = 2.0;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

/// Parses argv and runs the subcommand. Results go to `out`, diagnostics and warnings to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_fit(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_apply(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_eval(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_report(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_synth(const CliConfig& config, std::ostream& out, std::ostream& err);

}  // namespace calib::cli

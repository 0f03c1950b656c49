#include "calib/cli.hpp"

#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "calib/serialize.hpp"
#include "calib/synth.hpp"

namespace calib::cli {
namespace {

/// Thrown by a stage to abort the command with a status already reported.
struct Failed {
  int status;
};

template <typename F>
auto stage(std::ostream& err, const char* name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << name << ": [" << to_string(e.kind()) << "] " << e.what() << '\n';
    throw Failed{is_numerical(e.kind()) ? kExitNumerical : kExitUsage};
  } catch (const Json::exception& e) {
    err << "error: " << name << ": " << e.what() << '\n';
    throw Failed{kExitUsage};
  }
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const Failed& f) {
    return f.status;
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  file << text;
  if (!file) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

std::string valid_methods() {
  std::string joined;
  for (auto name : method_names()) {
    if (!joined.empty()) joined += ", ";
    joined += name;
  }
  return joined;
}

Method resolve_method(const std::string& name, std::ostream& err) {
  if (auto m = parse_method(name)) return *m;
  err << "error: unknown method '" << name << "'; valid methods: " << valid_methods() << '\n';
  throw Failed{kExitUsage};
}

void check_bins(int m_bins, std::ostream& err) {
  if (m_bins < 1) {
    err << "error: --bins must be a positive integer\n";
    throw Failed{kExitUsage};
  }
}

}  // namespace

int cmd_fit(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded([&] {
    const Method method = resolve_method(config.method, err);
    check_bins(config.m_bins, err);
    const auto data = stage(err, "loading validation data", [&] { return load_logits(config.logits, config.labels); });
    FitOptions options;
    options.histogram_bins = config.m_bins;
    auto outcome = stage(err, "fitting", [&] { return fit(method, data, options); });
    for (const auto& w : outcome.warnings) err << "warning: " << w << '\n';
    stage(err, "writing model", [&] {
      save_model(outcome.model, config.out);
      return 0;
    });
    out << outcome.summary << '\n';
    return kExitOk;
  });
}

int cmd_apply(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded([&] {
    const auto model = stage(err, "loading model", [&] { return load_model(config.model); });
    const auto logits = stage(err, "loading logits", [&] { return load_logit_matrix(config.logits); });
    const auto predictions = stage(err, "applying model", [&] { return calib::apply(model, logits); });

    std::ostringstream csv;
    csv << "label,confidence";
    if (config.full) {
      for (Eigen::Index k = 0; k < predictions.probs.cols(); ++k) csv << ",p" << k;
    }
    csv << '\n';
    for (Eigen::Index i = 0; i < predictions.labels.size(); ++i) {
      csv << predictions.labels(i) << ',' << format_double(predictions.confidences(i));
      if (config.full) {
        for (Eigen::Index k = 0; k < predictions.probs.cols(); ++k) csv << ',' << format_double(predictions.probs(i, k));
      }
      csv << '\n';
    }
    stage(err, "writing output", [&] {
      write_text(config.out, csv.str());
      return 0;
    });
    out << "wrote " << predictions.labels.size() << " calibrated rows to " << config.out << '\n';
    return kExitOk;
  });
}

int cmd_eval(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded([&] {
    check_bins(config.m_bins, err);
    const auto data = stage(err, "loading test data", [&] { return load_logits(config.logits, config.labels); });
    const auto before = stage(err, "evaluating", [&] { return evaluate(data, config.m_bins); });
    Json result = to_json(before);
    if (!config.model.empty()) {
      const auto model = stage(err, "loading model", [&] { return load_model(config.model); });
      const auto after = stage(err, "evaluating calibrated outputs", [&] {
        return evaluate(calib::apply(model, data.logits()), data.labels(), config.m_bins);
      });
      result = Json::object();
      result["method"] = to_json(model).at("method");
      result["before"] = to_json(before);
      result["after"] = to_json(after);
    }
    const auto text = result.dump(2) + "\n";
    out << text;
    if (!config.out.empty()) {
      stage(err, "writing report", [&] {
        write_text(config.out, text);
        return 0;
      });
    }
    return kExitOk;
  });
}

int cmd_report(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded([&] {
    check_bins(config.m_bins, err);
    const auto data = stage(err, "loading data", [&] { return load_logits(config.logits, config.labels); });
    const auto report = stage(err, "building reliability table", [&] {
      if (config.model.empty()) return evaluate(data, config.m_bins);
      const auto model = load_model(config.model);
      return evaluate(calib::apply(model, data.logits()), data.labels(), config.m_bins);
    });
    stage(err, "writing reliability table", [&] {
      write_text(config.out, reliability_table_csv(report.histogram));
      return 0;
    });
    out << "confidence histogram (" << report.histogram.m_bins << " bins, n = " << data.size() << ")\n";
    for (const auto& b : report.histogram.bins) {
      out << "(" << format_double(b.lower) << ", " << format_double(b.upper) << "] " << b.count << '\n';
    }
    out << "ece " << format_double(report.ece) << ", mce " << format_double(report.mce) << '\n';
    return kExitOk;
  });
}

int cmd_synth(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return guarded([&] {
    synth::SynthSpec spec;
    spec.n = config.n;
    spec.k = config.classes;
    spec.sharpening = config.sharpening;
    spec.logit_scale = config.logit_scale;
    spec.seed = config.seed.value_or(0);
    const auto data = stage(err, "generating", [&] { return synth::gen_sharpened(spec); });
    stage(err, "writing dataset", [&] {
      save_logits(data, config.logits, config.labels);
      return 0;
    });
    out << "wrote " << data.size() << " samples x " << data.num_classes() << " classes (sharpening "
        << format_double(spec.sharpening) << ", seed " << spec.seed << ")\n";
    return kExitOk;
  });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig config;
  std::uint64_t seed = 0;

  CLI::App app{"Confidence calibration toolkit for classifier logits", "calib"};
  app.require_subcommand(1);

  auto* fit_cmd = app.add_subcommand("fit", "Fit a calibration map on validation logits and labels");
  fit_cmd->add_option("--method", config.method, "Calibration method: " + valid_methods())->required();
  fit_cmd->add_option("--logits", config.logits, "Validation logits CSV")->required();
  fit_cmd->add_option("--labels", config.labels, "Validation labels CSV")->required();
  fit_cmd->add_option("--out", config.out, "Model JSON to write")->required();
  fit_cmd->add_option("--bins", config.m_bins, "Histogram binning bin count")->capture_default_str();
  fit_cmd->add_option("--seed", seed, "Accepted for uniformity; fitting is deterministic");

  auto* apply_cmd = app.add_subcommand("apply", "Apply a fitted model to logits");
  apply_cmd->add_option("--model", config.model, "Model JSON")->required();
  apply_cmd->add_option("--logits", config.logits, "Logits CSV")->required();
  apply_cmd->add_option("--out", config.out, "Calibrated output CSV")->required();
  apply_cmd->add_flag("--full", config.full, "Also write the full calibrated distribution");

  auto* eval_cmd = app.add_subcommand("eval", "Report ECE, MCE, NLL, error rate and entropy");
  eval_cmd->add_option("--logits", config.logits, "Test logits CSV")->required();
  eval_cmd->add_option("--labels", config.labels, "Test labels CSV")->required();
  eval_cmd->add_option("--model", config.model, "Optional model JSON for a before/after comparison");
  eval_cmd->add_option("--out", config.out, "Also write the JSON report here");
  eval_cmd->add_option("--bins", config.m_bins, "Reliability bins")->capture_default_str();

  auto* report_cmd = app.add_subcommand("report", "Write reliability-diagram data as CSV");
  report_cmd->add_option("--logits", config.logits, "Logits CSV")->required();
  report_cmd->add_option("--labels", config.labels, "Labels CSV")->required();
  report_cmd->add_option("--out", config.out, "Reliability table CSV")->required();
  report_cmd->add_option("--model", config.model, "Optional model JSON applied first");
  report_cmd->add_option("--bins", config.m_bins, "Reliability bins")->capture_default_str();

  auto* synth_cmd = app.add_subcommand("synth", "Generate a sharpened-softmax dataset");
  synth_cmd->add_option("--logits", config.logits, "Logits CSV to write")->required();
  synth_cmd->add_option("--labels", config.labels, "Labels CSV to write")->required();
  synth_cmd->add_option("--n", config.n, "Samples")->capture_default_str();
  synth_cmd->add_option("--classes", config.classes, "Classes")->capture_default_str();
  synth_cmd->add_option("--sharpening", config.sharpening, "Logit multiplier (true temperature)")
      ->capture_default_str();
  synth_cmd->add_option("--logit-scale", config.logit_scale, "Standard deviation of base logits")
      ->capture_default_str();
  synth_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (fit_cmd->parsed()) {
    config.subcommand = Subcommand::Fit;
    return cmd_fit(config, out, err);
  }
  if (apply_cmd->parsed()) {
    config.subcommand = Subcommand::Apply;
    return cmd_apply(config, out, err);
  }
  if (eval_cmd->parsed()) {
    config.subcommand = Subcommand::Eval;
    return cmd_eval(config, out, err);
  }
  if (report_cmd->parsed()) {
    config.subcommand = Subcommand::Report;
    return cmd_report(config, out, err);
  }
  config.subcommand = Subcommand::Synth;
  if (synth_cmd->count("--seed")) config.seed = seed;
  return cmd_synth(config, out, err);
}

}  // namespace calib::cli

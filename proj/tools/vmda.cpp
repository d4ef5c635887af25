// vmda command-line front end: run, eval, selftest, gen.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "oracle/selftest.hpp"
#include "vmda/errors.hpp"
#include "vmda/formats.hpp"
#include "vmda/metrics.hpp"
#include "vmda/run.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed, std::size_t jobs) {
  auto cfg = vmda::load_run_config(config);
  if (seed) cfg.seed = *seed;
  cfg.validate();
  const auto results = vmda::execute_run(cfg, jobs);
  for (const auto& r : results) {
    std::printf("%s: frames=%zu PR=%.4f SR=%.4f AUC=%.4f F=%.4f\n", r.name.c_str(), r.report.frames,
                r.report.precision_rate, r.report.success_rate, r.report.success_auc,
                r.report.long_term.f_score);
  }
  std::printf("wrote %s\n", cfg.output_dir.string().c_str());
  return kOk;
}

vmda::metrics::BoxSequence load_named(const std::string& path) {
  try {
    return vmda::io::load_boxes(path);
  } catch (const vmda::io::ParseError& e) {
    throw vmda::io::ParseError(path + ": " + e.what(), 0);
  }
}

int cmd_eval(const std::string& pred, const std::string& gt, double pr, double sr, const std::string& report) {
  const auto res = load_named(pred);
  const auto truth = load_named(gt);
  if (res.size() != truth.size()) {
    const auto shorter = std::min(res.size(), truth.size());
    throw vmda::ArgumentError("length mismatch: " + pred + " has " + std::to_string(res.size()) + " lines, " + gt +
                              " has " + std::to_string(truth.size()) + "; first unmatched line is " +
                              std::to_string(shorter + 1));
  }
  const auto r = vmda::metrics::evaluate(res, truth, pr, sr);
  std::printf("frames     %zu\n", r.frames);
  std::printf("PR@%g      %.6f\n", r.pr_threshold, r.precision_rate);
  std::printf("SR@%g     %.6f\n", r.sr_threshold, r.success_rate);
  std::printf("SR-AUC     %.6f\n", r.success_auc);
  std::printf("Precision  %.6f\n", r.long_term.precision);
  std::printf("Recall     %.6f\n", r.long_term.recall);
  std::printf("F-score    %.6f\n", r.long_term.f_score);
  if (!report.empty()) {
    nlohmann::json j = {{"frames", r.frames},
                        {"pr_threshold", r.pr_threshold},
                        {"sr_threshold", r.sr_threshold},
                        {"precision_rate", r.precision_rate},
                        {"success_rate", r.success_rate},
                        {"success_auc", r.success_auc},
                        {"precision", r.long_term.precision},
                        {"recall", r.long_term.recall},
                        {"f_score", r.long_term.f_score},
                        {"degenerate", r.long_term.degenerate}};
    std::ofstream os(report);
    if (!os) throw std::runtime_error("cannot write " + report);
    os << j.dump(2) << '\n';
  }
  return kOk;
}

int cmd_selftest(const std::string& config) {
  std::optional<std::filesystem::path> path;
  if (!config.empty()) path = config;
  const auto outcomes = vmda::selftest::run_all(path);
  std::size_t failed = 0;
  for (const auto& o : outcomes) {
    std::printf("%-4s %-28s %-8s %s\n", o.passed ? "PASS" : "FAIL", o.name.c_str(), o.oracle ? "oracle" : "property",
                o.detail.c_str());
    failed += !o.passed;
  }
  std::printf("%zu checks, %zu oracle, %zu failed\n", outcomes.size(), vmda::selftest::oracle_count(), failed);
  return failed ? kValidation : kOk;
}

int cmd_gen(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed) {
  auto cfg = vmda::load_run_config(config);
  if (seed) cfg.seed = *seed;
  cfg.validate();
  vmda::generate_sequences(cfg, out);
  std::printf("wrote %zu sequence(s) to %s\n", cfg.sequences, out.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vmda: multi-modal tracking with visual and memory adapters"};
  app.require_subcommand(1);

  std::string config, out, pred, gt, report;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  double pr = vmda::metrics::kDefaultPrThreshold, sr = vmda::metrics::kDefaultSrThreshold;

  auto* run = app.add_subcommand("run", "track the configured sequences and write boxes, snapshots, report");
  run->add_option("--config", config, "INI config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--jobs", jobs, "sequences tracked in parallel")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval", "score a predicted box file against ground truth");
  eval->add_option("pred", pred, "predicted box file")->required();
  eval->add_option("gt", gt, "ground-truth box file")->required();
  eval->add_option("--pr-threshold", pr, "center-error threshold in pixels")->capture_default_str();
  eval->add_option("--sr-threshold", sr, "IoU threshold")->capture_default_str();
  eval->add_option("--report", report, "also write the scores as JSON");

  auto* self = app.add_subcommand("selftest", "run the invariant and oracle suite");
  self->add_option("--config", config, "also validate this config");

  auto* gen = app.add_subcommand("gen", "write synthetic sequences");
  gen->add_option("--config", config, "INI config file")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--seed", seed, "override the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*run) return cmd_run(config, seed, jobs);
    if (*eval) return cmd_eval(pred, gt, pr, sr, report);
    if (*self) return cmd_selftest(config);
    if (*gen) return cmd_gen(config, out, seed);
  } catch (const vmda::io::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kRuntime;
}

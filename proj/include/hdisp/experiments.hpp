#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hdisp/config.hpp"

namespace hdisp {

// One pass/fail outcome. `criterion` is the acceptance criterion number as a
// string ("1".."11"), or "ratio" for the dispersive-ratio boundedness check.
struct Verdict {
  std::string criterion;
  std::string label;
  bool pass = false;
  std::string detail;
};

struct ExperimentRecord {
  std::string id;  // subcommand name
  std::vector<std::string> artifacts;
  nlohmann::json fits = nlohmann::json::object();
  std::vector<Verdict> verdicts;
  nlohmann::json timings = nlohmann::json::object();  // seconds per stage
  std::optional<std::string> numeric_failure;
  double seconds = 0.0;
  bool passed() const;
};

// Human-readable name of an acceptance criterion.
std::string criterion_title(const std::string& criterion);

const std::vector<std::string>& suite_names();  // every subcommand except "all"

ExperimentRecord run_verify_lemmas(const ExperimentConfig& cfg, const std::filesystem::path& out);
ExperimentRecord run_partition_check(const ExperimentConfig& cfg, const std::filesystem::path& out);
ExperimentRecord run_kernel_eval(const ExperimentConfig& cfg, const std::filesystem::path& out);
ExperimentRecord run_decay_fit(const ExperimentConfig& cfg, const std::filesystem::path& out);
ExperimentRecord run_sharpness(const ExperimentConfig& cfg, const std::filesystem::path& out);
ExperimentRecord run_dispersive_ratio(const ExperimentConfig& cfg, const std::filesystem::path& out);

// Runs one suite, or all of them for "all". A NonconvergenceError inside a
// suite is recorded on its record instead of propagating.
std::vector<ExperimentRecord> run_suite(const std::string& name, const ExperimentConfig& cfg,
                                        const std::filesystem::path& out);

// 0 all pass, 1 some verdict failed, 3 numerical nonconvergence.
int exit_status(const std::vector<ExperimentRecord>& records);

nlohmann::json summary_json(const std::vector<ExperimentRecord>& records,
                            const ExperimentConfig& cfg, int status);

struct CliRequest {
  std::string subcommand;
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  int threads = 0;  // 0 keeps the OpenMP default
  double tol_scale = 1.0;
};

// Loads and validates the config, runs the suite, writes summary.json and
// returns the exit status (2 on an invalid config or request).
int run_cli(const CliRequest& req, std::ostream& log);

}  // namespace hdisp

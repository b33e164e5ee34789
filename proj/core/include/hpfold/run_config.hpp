#pragma once

#include <filesystem>
#include <string>

#include "hpfold/selfplay.hpp"

namespace hpfold {

// The full set of knobs behind a training run, as written to and read
// from a JSON config file. A run directory always carries the exact
// snapshot it was launched with, so runs are auditable and resumable.
struct RunConfig {
  TrainingConfig training;
  std::string run_dir;

  bool operator==(const RunConfig& other) const;
};

// Strict parser: every field is required and unknown keys are an error,
// so a typo can never silently fall back to a default.
RunConfig parse_run_config(const std::string& json_text);
std::string serialize_run_config(const RunConfig& config);

RunConfig read_run_config(const std::filesystem::path& path);
void write_run_config(const std::filesystem::path& path,
                      const RunConfig& config);

// Template with the stock hyperparameters; the starting point for edits
// and the config written by `hpfold train --init`.
RunConfig default_run_config();

}  // namespace hpfold

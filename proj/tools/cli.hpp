#pragma once

#include "fraqhom/config.hpp"

#include <filesystem>
#include <string>

namespace fraqhom::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitNumerical = 4;

struct RunOptions {
  std::string command;
  std::filesystem::path out_dir;
  bool dry_run = false;
};

/// Runs one subcommand on a parsed configuration and writes its artifacts
/// plus manifest.csv into options.out_dir. Exceptions propagate.
void run_command(const ExperimentConfig& config, const RunOptions& options);

/// Full command-line entry point; returns the process exit code.
int main(int argc, char** argv);

} // namespace fraqhom::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bslab/config_json.hpp"

namespace bslab {

inline constexpr const char* kToolName = "bslab";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kCsvSchemaVersion = 1;

enum class RunStatus : int { Ok = 0, InvalidConfig = 2, ComputeError = 3, IoError = 4 };

const std::vector<std::string>& experiment_commands();

struct RunOptions {
    std::string command;
    /// When unset, the config's "out" key (relative to base_dir) is used,
    /// falling back to "out".
    std::optional<std::filesystem::path> out_dir;
    std::filesystem::path base_dir = ".";  // resolves relative model and out paths
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

struct RunOutcome {
    RunStatus status = RunStatus::Ok;
    json manifest;
    std::filesystem::path manifest_path;  // empty if it could not be written
};

/// Runs one experiment config (a JSON object) and writes CSVs plus
/// manifest.json into options.out_dir.
RunOutcome run_experiment(const json& config, const RunOptions& options);

/// Accepts a single object or an array of objects. Array entries run in
/// order, each into its own run-NNN sub-directory.
std::vector<RunOutcome> run_config(const json& config, const RunOptions& options);

/// Worst status over a batch (0 only if every run succeeded).
RunStatus combined_status(const std::vector<RunOutcome>& outcomes);

std::string format_double(double v);

}  // namespace bslab

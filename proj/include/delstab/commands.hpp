#pragma once

#include <string>

#include <json.hpp>

#include "delstab/report_io.hpp"

namespace delstab {

/// Exit codes shared by the CLI and the command layer.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNonGeneric = 3,
    kExitVerification = 4,
};

struct CommandResult {
    nlohmann::json report;
    int exit_code = kExitOk;
    std::string message; // human-readable summary / error text
};

CommandResult cmd_analyze(const RunConfig& cfg);
CommandResult cmd_switches(const RunConfig& cfg);
CommandResult cmd_simulate(const RunConfig& cfg);
CommandResult cmd_scan(const RunConfig& cfg);
CommandResult cmd_triad(const RunConfig& cfg);

/// Dispatch by subcommand name; maps thrown errors onto exit codes.
CommandResult run_command(const std::string& name, const RunConfig& cfg);

} // namespace delstab

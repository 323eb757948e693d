#pragma once

#include <string>

#include "fujitalab/config.hpp"

namespace fujitalab {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes of run_command: success / config error / non-converged
/// result (files still written).
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNotConverged = 3;

/// Executes one CLI verb (simulate | sweep | kernel | decay-check |
/// testfn-verify) against a validated config, emitting tables, reports,
/// field files, the config snapshot and the run manifest under
/// cfg.out_dir. Returns the exit code.
int run_command(const std::string& verb, const Config& cfg);

}  // namespace fujitalab

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "io.hpp"

namespace pberg::app {

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_validation = 2, exit_nonconvergence = 3, exit_refused = 4 };

struct JobOutcome {
    int code = exit_ok;
    std::vector<std::filesystem::path> artifacts;
    std::string message;
};

/// The commands run_job understands.
const std::vector<std::string>& commands();

/// Validates the spec, runs one command and writes its artifacts into out_dir.
/// Validation failures write nothing; refusals write only a diagnostics report.
JobOutcome run_job(const std::string& command, const io::Json& spec, const std::filesystem::path& out_dir);

/// Reads the spec file first; unreadable or malformed JSON is a validation failure.
JobOutcome run_job_file(const std::string& command, const std::filesystem::path& spec_path,
                        const std::filesystem::path& out_dir);

}  // namespace pberg::app

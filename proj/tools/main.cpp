#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "checks.hpp"
#include "jobs.hpp"
#include "pberg/parallel.hpp"

namespace {

int threads_from_env() {
    const char* env = std::getenv("PBERG_THREADS");
    if (env == nullptr || *env == '\0') return 0;
    try {
        const int n = std::stoi(env);
        return n > 0 ? n : 0;
    } catch (const std::exception&) {
        return 0;
    }
}

}  // namespace

int main(int argc, char** argv) {
    using namespace pberg::app;
    CLI::App app{"p-Bergman kernels, isometry reconstruction and variation checks"};
    std::string command;
    std::string spec;
    std::string out;
    bool check = false;
    int threads = 0;
    std::string command_help = "one of:";
    for (const auto& c : commands()) command_help += " " + c;
    app.add_option("command", command, command_help);
    app.add_option("--spec", spec, "job specification (JSON)");
    app.add_option("--out", out, "output directory");
    app.add_flag("--check", check, "run the acceptance batteries; nonzero exit on any failure");
    app.add_option("--threads", threads, "worker threads (default: PBERG_THREADS, then all cores)")
        ->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_validation;
    }
    pberg::set_thread_count(threads > 0 ? threads : threads_from_env());

    int status = exit_ok;
    const bool run_job_requested = !command.empty() && command != "check";
    if (run_job_requested) {
        if (spec.empty() || out.empty()) {
            std::cerr << "pberg: " << command << " needs --spec and --out\n";
            return exit_validation;
        }
        const JobOutcome r = run_job_file(command, spec, out);
        for (const auto& a : r.artifacts) std::cout << "wrote " << a.string() << "\n";
        if (r.code != exit_ok) std::cerr << "pberg: " << r.message << "\n";
        status = r.code;
    } else if (!check) {
        std::cerr << "pberg: missing command (use --help)\n";
        return exit_validation;
    }

    if (check) {
        bool all = true;
        run_checks([&](const CheckOutcome& c) {
            all = all && c.passed;
            std::cout << format_outcome(c) << std::endl;
        });
        if (status == exit_ok && !all) status = exit_failure;
    }
    return status;
}

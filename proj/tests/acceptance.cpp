// One line per acceptance criterion; exits nonzero when any of them fails.
#include <iostream>

#include "checks.hpp"

int main() {
    bool all = true;
    pberg::app::run_checks([&](const pberg::app::CheckOutcome& c) {
        all = all && c.passed;
        std::cout << pberg::app::format_outcome(c) << std::endl;
    });
    std::cout << (all ? "all acceptance criteria passed" : "acceptance criteria failed") << std::endl;
    return all ? 0 : 1;
}

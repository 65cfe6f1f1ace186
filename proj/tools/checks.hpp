#pragma once

#include <functional>
#include <string>
#include <vector>

namespace pberg::app {

struct CheckOutcome {
    std::string id;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Identifiers of the acceptance batteries, in run order.
const std::vector<std::string>& check_ids();

/// Runs one battery; failures inside the battery are reported, not thrown.
CheckOutcome run_check(const std::string& id);

/// Runs every battery, reporting each outcome as it finishes.
std::vector<CheckOutcome> run_checks(const std::function<void(const CheckOutcome&)>& on_result = {});

/// One line: "PASS <id> (<seconds>s): <detail>".
std::string format_outcome(const CheckOutcome& c);

}  // namespace pberg::app

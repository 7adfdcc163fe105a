#pragma once

#include <string>
#include <vector>

namespace gridlock {

struct CriterionResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Names of all release criteria, in run order.
std::vector<std::string> criterion_names();

/// Runs the release criteria (all of them, or the named subset) and returns
/// one result per criterion. Unknown names throw ConfigError.
std::vector<CriterionResult> run_acceptance(const std::vector<std::string>& filter = {});

} // namespace gridlock

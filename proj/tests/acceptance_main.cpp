// Release gate: runs every criterion and prints one PASS/FAIL line each.
// Exits non-zero when any criterion fails.

#include <cstdio>
#include <iostream>

#include "gridlock/validation.hpp"

int main() {
    const auto results = gridlock::run_acceptance();
    bool all_pass = true;
    for (const gridlock::CriterionResult& r : results) {
        std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  [" << r.detail << "]\n";
        all_pass &= r.passed;
    }
    std::cout << (all_pass ? "acceptance: all criteria passed"
                           : "acceptance: FAILURES present")
              << std::endl;
    return all_pass ? 0 : 1;
}

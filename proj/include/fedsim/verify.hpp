#pragma once
// Acceptance battery: end-to-end checks with pinned tolerances and time
// budgets, printed one pass/fail line per criterion. Shared by the
// acceptance test binary and the command-line `verify` subcommand.

#include <iosfwd>
#include <string>
#include <vector>

namespace fedsim::verify {

struct CriterionResult {
    std::string name;
    bool passed = false;
    std::string detail;    // measured numbers vs. bounds
    double seconds = 0.0;
    double limit_seconds = 0.0;
};

// Runs every criterion in order, streaming one result line each to `out`.
std::vector<CriterionResult> run_all(std::ostream& out);

bool all_passed(const std::vector<CriterionResult>& results);

} // namespace fedsim::verify

// Acceptance battery runner: one pass/fail line per criterion, nonzero exit
// if any criterion fails or overruns its time budget.

#include <iostream>

#include "fedsim/kernels.hpp"
#include "fedsim/verify.hpp"

int main() {
    std::cout << "compute backend: " << fedsim::kernels::active().name << "\n";
    const auto results = fedsim::verify::run_all(std::cout);
    const bool ok = fedsim::verify::all_passed(results);
    std::cout << (ok ? "all criteria passed\n" : "CRITERIA FAILED\n");
    return ok ? 0 : 1;
}

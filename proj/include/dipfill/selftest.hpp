#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dipfill {

struct CheckResult {
    std::string name;
    double max_rel_error;
    double tolerance;
    bool pass;
};

// Central-difference gradient checks (eps 1e-5) over every differentiable
// operator plus an end-to-end depth-2 network loss, on seeded random
// tensors. Elementwise/linear ops must come in under 1e-6, the end-to-end
// check under 1e-5.
std::vector<CheckResult> run_selftest(std::uint64_t seed = 7);

bool all_passed(const std::vector<CheckResult>& results);
std::string selftest_table(const std::vector<CheckResult>& results);

}  // namespace dipfill

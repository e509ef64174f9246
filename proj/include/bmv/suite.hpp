#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bmv {

struct CheckResult {
    std::string name;
    bool passed = false;
    double observed = 0.0;  // the quantity under test
    double budget = 0.0;    // the bound it must respect
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::uint64_t seed = 0;
    bool passed = false;
    std::vector<CheckResult> checks;

    std::string to_json() const;  // deterministic field order and formatting
};

std::vector<std::string> registered_suites();

/// Runs the named check battery. Deterministic given (name, seed);
/// throws on an unregistered name.
SuiteReport run_suite(const std::string& name, std::uint64_t seed);

}  // namespace bmv

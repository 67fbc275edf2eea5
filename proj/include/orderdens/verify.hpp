#pragma once

/// The reference verification suite: every published table value and worked
/// example pinned as an exact string fixture, run end to end through the library.

#include "orderdens/exactnum.hpp"

#include <string>
#include <vector>

namespace orderdens {

struct VerifyOptions {
    bool skip_empirical = false;
    int threads = 2;
    long long empirical_bound = 100000;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail; // first failure, or a short summary
    double seconds = 0.0;
};

std::vector<CriterionResult> run_acceptance(const VerifyOptions& opts);

/// Convenience: true iff every criterion passed.
bool all_passed(const std::vector<CriterionResult>& rs);

} // namespace orderdens

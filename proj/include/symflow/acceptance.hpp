#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace symflow {

struct ClaimResult {
    std::string id;
    std::string anchor;
    std::string computed;
    std::string expected;
    double tolerance = 0;
    bool pass = false;
    double seconds = 0;
};

struct AcceptanceReport {
    std::uint64_t seed = 2026;
    std::vector<ClaimResult> claims;
    bool all_pass() const {
        for (const auto& c : claims)
            if (!c.pass) return false;
        return !claims.empty();
    }
};

// Runs the whole verification suite. `progress` (optional) receives one
// pass/fail line per claim as it completes. `quick` trims the long-horizon
// orbit search (used by unit tests; the full suite uses quick=false).
AcceptanceReport run_acceptance(std::uint64_t seed, std::ostream* progress,
                                bool quick = false);

}  // namespace symflow

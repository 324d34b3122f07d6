// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ntc {

// Oracle suite: finite-difference checks for every VJP, adjointness and
// orthogonality identities, the reparameterized-step identity and the
// spectral-optimizer equivalences. Each row reports the worst error observed
// over `trials` random instances against its tolerance.
struct CheckRow {
    std::string name;
    double max_err = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail; // reproduction hint for the worst case
};

struct CheckReport {
    std::vector<CheckRow> rows;
    bool all_pass = true;
};

// inject_fault deliberately corrupts one conv gradient before comparison
// (negative control for the exit-status contract).
CheckReport run_gradcheck(std::uint64_t seed, std::size_t trials, bool inject_fault = false);

void print_report(const CheckReport& report, std::ostream& out);

} // namespace ntc

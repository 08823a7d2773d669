#pragma once

#include <iosfwd>

namespace drclab {

/// Desk-scale property sweep over the library invariants: natural-output
/// recovery, truncation identities, projection geometry, gradient checks,
/// adaptive-rate bookkeeping, regret-bound dominance, decomposition
/// consistency and artifact round-trips. Prints one "PASS name" or
/// "FAIL name: detail" line per invariant and returns the failure count.
int run_selftest(std::ostream& out);

}  // namespace drclab

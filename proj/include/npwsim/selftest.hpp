#pragma once

#include <ostream>

namespace npwsim {

/// Quick reduced-scale invariant checks; prints one PASS/FAIL line per check.
/// Returns the number of failed checks.
int run_selftest(std::ostream& out);

}  // namespace npwsim

#pragma once

#include <ostream>

namespace spherbf::acceptance {

/// Runs the full verification suite, printing one pass/fail line per
/// criterion; returns true iff every criterion passed.
bool run_all(std::ostream& os);

}  // namespace spherbf::acceptance

#pragma once

#include <ostream>

namespace mealrec {

// Entry point for the `mealrec` binary. Returns the process exit code:
// 0 ok, 1 validation or domain failure, 2 I/O, config or usage failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mealrec

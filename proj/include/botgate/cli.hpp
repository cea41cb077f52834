#pragma once

#include <ostream>

namespace botgate {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1; // bad arguments or invalid input values
inline constexpr int credential = 2;
inline constexpr int not_found = 3;
inline constexpr int model = 4;
inline constexpr int io = 5; // unreadable or malformed files, network failures
} // namespace exit_code

// The botgate command line: predict, export-features, train, evaluate and
// serve-rating. Writes results to `out` and diagnostics to `err`; returns
// the process exit code.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace botgate

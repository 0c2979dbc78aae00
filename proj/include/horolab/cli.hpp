#pragma once

// Command-line front end: `horolab <subcommand> [--flags] [--config file]`.

#include <ostream>

namespace horolab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInconclusive = 2;

/// Runs one subcommand. CSV goes to --csv (default `out`); the JSON summary
/// goes to --json, or to `err` when the CSV occupies `out`, or to `out`
/// otherwise. Diagnostics go to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace horolab::cli

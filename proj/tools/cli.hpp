#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace pipestash::cli {

struct CliIo {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  // Picks the default output format: table on a terminal, JSON otherwise.
  bool out_is_tty = false;
};

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2 };

/// Runs one command line. `args` excludes the program name. Machine output
/// goes to `io.out`, diagnostics to `io.err`.
int run_cli(std::span<const std::string> args, CliIo io);

}  // namespace pipestash::cli

#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace geotri::cli {

// Exit codes of run().
inline constexpr int kOk = 0;
inline constexpr int kValidationError = 1;
inline constexpr int kIoError = 2;

// Runs one subcommand. `args` excludes the program name. Prints a single
// key=value summary line to `out` on success and diagnostics to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace geotri::cli

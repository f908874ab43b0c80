#pragma once

namespace softlex::cli {

// Full command-line entry point: subcommands train, eval, predict, bench,
// freq, features. Returns the process exit code; never throws.
int run(int argc, const char* const* argv);

}  // namespace softlex::cli

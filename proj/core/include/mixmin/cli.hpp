#pragma once

namespace mixmin {

// Entry point for the command-line tool. Returns the process exit code:
// 0 success, 1 usage error, 2 data or runtime error.
int run_cli(int argc, const char* const* argv);

}  // namespace mixmin

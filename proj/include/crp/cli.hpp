#pragma once

#include <iosfwd>

namespace crp {

/// Entry point for the `crp` tool. Returns the process exit code:
/// 0 ok, 1 usage, 2 data, 3 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crp

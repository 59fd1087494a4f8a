#pragma once

#include <iosfwd>

namespace bcq {

/// Entry point of the `bcq` tool. Exit codes: 0 success, 1 input error,
/// 2 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bcq

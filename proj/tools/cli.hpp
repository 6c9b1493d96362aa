#pragma once

#include <ostream>

namespace swasr::cli {

/// Entry point for the `swasr` command. Exit codes: 0 success, 1 user error,
/// 2 runtime error. The last line written to `out` is a `status=...` record.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace swasr::cli

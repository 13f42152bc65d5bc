#pragma once

#include <iosfwd>

namespace lutsoftmax::cli {

/// Runs one subcommand. Exit codes: 0 success, 1 usage error (synopsis on
/// `err`), 2 runtime error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lutsoftmax::cli

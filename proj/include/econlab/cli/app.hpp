#pragma once

#include <iosfwd>

namespace econlab::cli {

/// Entry point of the `econlab` binary. Results go to `out` as JSON; failures go to `err`
/// as {"error": {...}} with a nonzero return.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace econlab::cli

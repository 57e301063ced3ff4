#pragma once

#include <iosfwd>

namespace anchoropt::cli {

/// Exit codes: 0 success, 1 domain or validation error, 2 usage error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace anchoropt::cli

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace lapepi::cli {

/// Exit codes: 0 success, 1 domain error, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lapepi::cli

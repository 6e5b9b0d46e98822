#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mym::cli {

/// Formats with six decimals; exact ties round to even.
std::string fixed6(double v);

/// Entry point behind the `mym` binary. Returns 0 on success, 1 on a domain
/// error, 2 on a usage error. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mym::cli

#pragma once

#include <string>

namespace ftcl {

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace ftcl

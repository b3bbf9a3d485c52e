#pragma once

#include <string>

namespace drrisk {

// Shortest text that round-trips the double (at most 17 significant digits).
std::string format_double(double x);

}  // namespace drrisk

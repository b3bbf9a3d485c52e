#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "drrisk/distributions.hpp"

namespace drrisk::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // I/O and other runtime failures
inline constexpr int kExitUsage = 2;    // bad flags, config or values
inline constexpr int kExitDomain = 3;   // well-formed input without a finite/feasible answer

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// gauss:mu,sigma | gaussnd:{"mu":[..],"sigma":[[..],..]} | box:lo1,..,lon,hi1,..,hin |
// ring:inner,outer,dim | discrete:x,y@w;x,y@w
// Throws InvalidArgument on malformed text.
Distribution parse_distribution(std::string_view text);

}  // namespace drrisk::cli

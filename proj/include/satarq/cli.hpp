#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace satarq {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes: 0 success, 1 validation mismatch, 2 invalid input.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace satarq

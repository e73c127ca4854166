#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mtk::cli {

inline constexpr const char* kToolVersion = "1.0.0";

// Exit codes: 0 success, 1 per-clip failures (details in the outputs), 2 fatal
// configuration or I/O error. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mtk::cli

#pragma once

#include <string>
#include <vector>

namespace wordlelab::cli {

/// Full command-line entry point. Exit codes: 0 success, 1 computation
/// failure, 2 I/O or configuration failure.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace wordlelab::cli

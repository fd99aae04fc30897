#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace holo::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Runs one holo_evp invocation. Returns 0 on success, 2 on a configuration or
/// usage error, 3 on a numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace holo::cli

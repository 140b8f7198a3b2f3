#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace v2v::cli {

/// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numeric failure.
enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericFailure = 3 };

/// Runs the vec2vec command line. argv[0] is the program name.
int run(std::span<const std::string> argv, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace v2v::cli

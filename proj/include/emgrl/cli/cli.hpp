#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emgrl::cli {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputEnv = "EMGRL_OUT";

/// Runs one subcommand (synth, train, evaluate, compare, gradcheck).
/// Returns 0 on success, 1 on validation or runtime errors and 2 on bad flags.
/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace emgrl::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace faqkit::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Parses args (args[0] is the program name) and runs one subcommand.
/// Returns 0 on success, 2 on usage/configuration errors, 1 on data errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace faqkit::cli

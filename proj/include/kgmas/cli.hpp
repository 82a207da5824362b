#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kgmas {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainFailure = 1;
inline constexpr int kExitInputError = 2;

/// Entry point of the kgmas command line; `args` excludes the program name.
/// Subcommands: validate, generate, run, dump, trace, check.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kgmas

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cpm::cli {

// Exit codes: 0 success (converged), 1 input or usage error, 2 fit did not converge.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;

// Runs `cpm <subcommand> ...`; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cpm::cli

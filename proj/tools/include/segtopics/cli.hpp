#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace segtopics::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Runs one subcommand. args excludes the program name. Reports go to out,
// logs and error messages to err.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace segtopics::cli

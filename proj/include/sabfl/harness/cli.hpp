#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sabfl {

// Exit codes: 0 success, 1 a check failed (tampered chain, failed bound,
// faulted run), 2 usage or configuration error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_dispatch(int argc, char** argv);

}  // namespace sabfl

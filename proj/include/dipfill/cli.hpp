#pragma once

#include <string>
#include <vector>

namespace dipfill {

// Entry point behind the `dipfill` binary; also callable in-process from
// tests. Exit codes: 0 success, 1 usage error, 2 input/parse error,
// 3 numeric failure.
int cli_main(const std::vector<std::string>& args);
int cli_main(int argc, const char* const* argv);

}  // namespace dipfill

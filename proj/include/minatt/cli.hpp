#pragma once

namespace minatt {

/// Exit codes: 0 every check passed, 1 a check failed, 2 bad config or usage, 3 I/O error.
int run_cli(int argc, char** argv);

}  // namespace minatt

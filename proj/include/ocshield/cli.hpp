#pragma once

#include <string>
#include <vector>

namespace ocshield::cli {

/// Run one CLI invocation (argv without the program name). Returns the
/// process exit status; errors are reported as a single
/// "error: <code>: <message>" line on stderr.
int run(const std::vector<std::string>& args);

} // namespace ocshield::cli

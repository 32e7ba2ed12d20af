#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace drqn {

// Runs one subcommand. `args` excludes the program name. Failures print one
// line `error kind=<Kind> exit=<code>: <message>` to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Exit code for an exception: UsageError 2, ConfigError 3, data errors 4, else 1.
int exit_code_for(const std::exception& e);

}  // namespace drqn

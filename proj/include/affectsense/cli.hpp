#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace affectsense {

/// Exit codes: 0 success, 1 usage or configuration error, 2 run finished with record errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_command(int argc, char** argv);

} // namespace affectsense

#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace vid {

// Entry point behind the `vid` binary; exposed for in-process testing.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace vid

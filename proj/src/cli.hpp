#pragma once

#include <string>
#include <vector>

namespace tunnel::cli {

enum ExitCode { success = 0, config_error = 2, numerical_failure = 3, strict_failure = 4 };

int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace tunnel::cli

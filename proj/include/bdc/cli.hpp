// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <string>
#include <vector>

namespace bdc {

// Entry point of the `bdc` tool; args excludes the program name. Returns 0
// on success, 1 on invalid input or usage, 2 on numerical failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace bdc

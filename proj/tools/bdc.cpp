// Apache License, Version 2.0, refer to LICENSE.txt

#include <string>
#include <vector>

#include "bdc/cli.hpp"

int main(int argc, char** argv) {
  return bdc::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}

#include <iostream>
#include <string>
#include <vector>

#include "pwgf/harness/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return pwgf::harness::cli_main(args, std::cout, std::cerr);
}

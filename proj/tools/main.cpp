#include <iostream>
#include <string>
#include <vector>

#include "hybridrc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return hybridrc::run_cli(args, std::cout, std::cerr);
}

#include <iostream>
#include <string>
#include <vector>

#include "drqn/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return drqn::cli_main(args, std::cout, std::cerr);
}

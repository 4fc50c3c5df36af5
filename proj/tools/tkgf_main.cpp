#include <iostream>

#include "tkgf/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return tkgf::run_cli(args, std::cout, std::cerr);
}

#include <iostream>
#include <string>
#include <vector>

#include "robustglm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return robustglm::run_cli(args, std::cout, std::cerr);
}

#include <iostream>
#include <string>
#include <vector>

#include "sblab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sblab::run_main(args, std::cout, std::cerr);
}

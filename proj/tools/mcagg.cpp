#include <iostream>
#include <string>
#include <vector>

#include "mcagg/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mcagg::run_cli(args, std::cout, std::cerr);
}

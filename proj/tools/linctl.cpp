#include <iostream>
#include <string>
#include <vector>

#include "linctl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return linctl::cli::run(args, std::cout, std::cerr);
}

#include <iostream>
#include <string>
#include <vector>

#include "samplesize/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return samplesize::run_cli(args, std::cout, std::cerr);
}

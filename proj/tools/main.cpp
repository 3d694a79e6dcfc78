#include <iostream>

#include "midlearn/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return midlearn::run_cli(args, std::cout, std::cerr);
}

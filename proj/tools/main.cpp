#include <iostream>
#include <string>
#include <vector>

#include "shapkit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return shapkit::run_cli(args, std::cout, std::cerr);
}

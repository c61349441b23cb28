#include <iostream>
#include <string>
#include <vector>

#include "satarq/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return satarq::run_cli(args, std::cout, std::cerr);
}

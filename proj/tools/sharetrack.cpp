#include <iostream>
#include <string>
#include <vector>

#include "sharetrack/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return sharetrack::run_cli(args, std::cout, std::cerr);
}

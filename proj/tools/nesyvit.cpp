#include <iostream>
#include <string>
#include <vector>

#include "nesyvit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return nesyvit::cli::run(args, std::cout, std::cerr);
}

#include <iostream>
#include <string>
#include <vector>

#include "brackind/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return brackind::cli::run(args, std::cout, std::cerr);
}

#include <iostream>
#include <string>
#include <vector>

#include "calib/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return calib::cli::run(args, std::cout, std::cerr);
}

#include <iostream>
#include <string>
#include <vector>

#include "mpsros/experiment.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mpsros::run_cli(args, std::cout, std::cerr);
}

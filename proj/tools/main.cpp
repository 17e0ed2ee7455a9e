#include <iostream>

#include "ctr3/cli.hpp"

int main(int argc, char** argv) {
  return ctr3::run_cli(argc, argv, std::cout, std::cerr);
}

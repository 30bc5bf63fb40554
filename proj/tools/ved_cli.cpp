#include <iostream>

#include "ved/cli.hpp"

int main(int argc, char** argv) {
  return ved::cli::run(argc, argv, std::cout, std::cerr);
}

#include <iostream>

#include "jointguard/cli.hpp"

int main(int argc, char** argv) {
  return jointguard::cli::run(argc, argv, std::cout, std::cerr);
}

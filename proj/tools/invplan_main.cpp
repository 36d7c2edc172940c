#include <iostream>

#include "invplan/cli.hpp"

int main(int argc, char** argv) {
  return invplan::run_cli(argc, argv, std::cout, std::cerr);
}

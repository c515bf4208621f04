#include <iostream>

#include "pdmp/cli.hpp"

int main(int argc, char** argv) {
  return pdmp::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}

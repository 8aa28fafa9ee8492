#include <iostream>
#include <string>
#include <vector>

#include "inwdt/cli.hpp"

int main(int argc, char** argv) {
  return inwdt::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

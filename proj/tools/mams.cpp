#include <iostream>
#include <string>
#include <vector>

#include "mams/cli.hpp"

int main(int argc, char** argv) {
  return mams::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

#include <iostream>
#include <string>
#include <vector>

#include "wikievents/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return wikievents::cli::Run(args, std::cin, std::cout, std::cerr);
}

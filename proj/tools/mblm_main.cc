#include <iostream>

#include "cli.hh"

int main(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mblm::cli::run(args, std::cout, std::cerr);
}

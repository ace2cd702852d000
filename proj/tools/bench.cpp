#include <iostream>
#include <string>
#include <vector>

#include "mmf/harness.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mmf::bench_main(args, std::cout, std::cerr);
}

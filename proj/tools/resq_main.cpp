#include <string>
#include <vector>

#include "resq/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return resq::run_command(args);
}

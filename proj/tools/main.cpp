#include <vector>

#include "ssm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ssm::run_cli(args);
}

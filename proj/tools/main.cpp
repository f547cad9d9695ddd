#include <string>
#include <vector>

#include "evstab/cli.hpp"

int main(int argc, char** argv) {
  return evstab::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}

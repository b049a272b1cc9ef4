// SPDX-License-Identifier: MIT
#include <string>
#include <vector>

#include "gdlm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gdlm::cli::run(std::move(args));
}

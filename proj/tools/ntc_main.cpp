#include <string>
#include <vector>

#include "ntc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ntc::cli::run(args);
}

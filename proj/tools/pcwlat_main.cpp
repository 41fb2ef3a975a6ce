#include <vector>

#include "pcwlat/scenario.hpp"

int main(int argc, char** argv) {
  return pcwlat::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}

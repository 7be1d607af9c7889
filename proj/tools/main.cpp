#include "cli.hpp"

int main(int argc, char** argv) {
  return cganseg::cli::run(std::vector<std::string>(argv, argv + argc));
}

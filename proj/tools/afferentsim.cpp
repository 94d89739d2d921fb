#include <iostream>

#include "afferentsim/app/commands.hpp"

int main(int argc, char** argv) {
  return afferentsim::app::run_cli(argc, argv, std::cout, std::cerr);
}

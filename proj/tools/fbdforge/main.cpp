#include <iostream>

#include "fbdforge/cli.hpp"

int main(int argc, char** argv) { return fbdforge::cli::run_cli(argc, argv, std::cout, std::cerr); }

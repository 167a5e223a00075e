#include <iostream>

#include "chaos/cli.hpp"

int main(int argc, char** argv) { return chaos::cli::run_cli(argc, argv, std::cout, std::cerr); }

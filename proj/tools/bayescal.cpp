#include <iostream>

#include "bayescal/cli.hpp"

int main(int argc, char** argv) { return bayescal::cli::run_cli(argc, argv, std::cout, std::cerr); }

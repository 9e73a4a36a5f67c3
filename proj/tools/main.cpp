#include <iostream>

#include "crimewave_cli/cli.hpp"

int main(int argc, char** argv) { return crimewave::cli::run(argc, argv, std::cout, std::cerr); }

#include "nfim/cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) { return nfim::cli::run_cli(argc, argv, std::cout, std::cerr); }

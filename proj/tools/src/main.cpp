#include <iostream>

#include "kgat_cli/cli.hpp"

int main(int argc, char** argv) { return kgat::cli::run(argc, argv, std::cout, std::cerr); }

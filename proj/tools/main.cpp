#include <iostream>

#include "sphcox/cli.hpp"

int main(int argc, char** argv) { return sphcox::cli_main(argc, argv, std::cout, std::cerr); }

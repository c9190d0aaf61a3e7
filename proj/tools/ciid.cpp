#include <iostream>

#include "ciid/cli.hpp"

int main(int argc, char** argv) { return ciid::cli::run(argc, argv, std::cout, std::cerr); }

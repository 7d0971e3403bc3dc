#include <iostream>

#include "z2q/cli.hpp"

int main(int argc, char** argv) { return z2q::cli::main(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "cidpred/cli.hpp"

int main(int argc, char** argv) { return cidpred::cli::main(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "cilia/cli.hpp"

int main(int argc, char** argv) { return cilia::cli::run(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "curvflow/cli.hpp"

int main(int argc, char** argv) { return curvflow::cli::main(argc, argv, std::cout, std::cerr); }

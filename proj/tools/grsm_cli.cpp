#include <iostream>

#include "grsm/cli.hpp"

int main(int argc, char** argv) { return grsm::cli::run(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "efimov/cli.hpp"

int main(int argc, char** argv) { return efimov::cli::run(argc, argv, std::cout, std::cerr); }

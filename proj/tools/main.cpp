#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return swasr::cli::run(argc, argv, std::cout, std::cerr); }

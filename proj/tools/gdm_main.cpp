#include <iostream>

#include "gdm/cli.hpp"

int main(int argc, char** argv) { return gdm::cli::run(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "securesense/cli/commands.hpp"

int main(int argc, char** argv) { return securesense::cli::run(argc, argv, std::cout, std::cerr); }

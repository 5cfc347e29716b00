#include <iostream>

#include "emgrl/cli/cli.hpp"

int main(int argc, char** argv) { return emgrl::cli::run(argc, argv, std::cout, std::cerr); }

#include "mucalc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mucalc::cli::run(argc, argv, std::cout, std::cerr); }

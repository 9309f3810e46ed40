#include <iostream>

#include "stochsym/cli.hpp"

int main(int argc, char** argv) { return stochsym::run_cli(argc, argv, std::cout, std::cerr); }

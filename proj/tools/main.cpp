#include <iostream>

#include "ldptail/cli.hpp"

int main(int argc, char** argv) { return ldptail::run_cli(argc, argv, std::cout, std::cerr); }

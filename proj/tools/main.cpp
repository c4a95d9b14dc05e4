#include <iostream>

#include "pisa/io/cli.hpp"

int main(int argc, char** argv) { return pisa::run_cli(argc, argv, std::cout, std::cerr); }

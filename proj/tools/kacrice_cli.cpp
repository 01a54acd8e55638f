#include <iostream>

#include "kacrice/cli.hpp"

int main(int argc, char** argv) { return kacrice::run_cli(argc, argv, std::cout, std::cerr); }

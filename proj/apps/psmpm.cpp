#include "psmpm/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return psmpm::run_cli(argc, argv, std::cout, std::cerr); }

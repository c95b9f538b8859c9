#include <iostream>

#include "ergolab/cli_runner.hpp"

int main(int argc, char** argv) { return ergolab::run_cli(argc, argv, std::cout, std::cerr); }

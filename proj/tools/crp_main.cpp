#include <iostream>

#include "crp/cli.hpp"

int main(int argc, char** argv) { return crp::run_cli(argc, argv, std::cout, std::cerr); }

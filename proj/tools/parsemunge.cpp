#include <iostream>

#include "parsemunge/cli.hpp"

int main(int argc, char** argv) { return parsemunge::run_cli(argc, argv, std::cout, std::cerr); }

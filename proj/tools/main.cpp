#include <iostream>

#include "learnmmd/cli.hpp"

int main(int argc, char** argv) { return learnmmd::run_cli(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "bcq/cli.hpp"

int main(int argc, char** argv) { return bcq::run_cli(argc, argv, std::cout, std::cerr); }

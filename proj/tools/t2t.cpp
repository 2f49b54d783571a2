#include <iostream>

#include "t2t/cli.hpp"

int main(int argc, char** argv) { return t2t::run_cli(argc, argv, std::cout, std::cerr); }

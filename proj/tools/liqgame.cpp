#include <iostream>

#include "liqgame/cli.hpp"

int main(int argc, char** argv) { return liqgame::cli::run_cli(argc, argv, std::cout, std::cerr); }

#include "botgate/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return botgate::run_cli(argc, argv, std::cout, std::cerr); }

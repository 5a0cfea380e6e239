#include <iostream>

#include "polympc/cli.hpp"

int main(int argc, char** argv) { return polympc::run_cli(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "erl/cli.hpp"

int main(int argc, char** argv) { return erl::cli::dispatch(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "anchoropt/cli.hpp"

int main(int argc, char** argv) { return anchoropt::cli::dispatch(argc, argv, std::cout, std::cerr); }

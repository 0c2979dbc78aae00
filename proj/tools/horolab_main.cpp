#include <iostream>

#include "horolab/cli.hpp"

int main(int argc, char** argv) { return horolab::cli::cli_main(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "rapm/cli.hpp"

int main(int argc, char** argv) { return rapm::cli::run(argc, argv, std::cout, std::cerr); }

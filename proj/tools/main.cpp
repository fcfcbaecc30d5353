#include <iostream>

#include "medxplain/cli.hpp"

int main(int argc, char** argv) { return medxplain::cli::run(argc, argv, std::cout, std::cerr); }

#include "mvrec/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mvrec::cli::run(argc, argv, std::cout, std::cerr); }

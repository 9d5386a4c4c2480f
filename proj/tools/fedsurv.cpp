#include <iostream>

#include "fedsurv/cli.hpp"

int main(int argc, char** argv) { return fedsurv::cli::run(argc, argv, std::cout, std::cerr); }

#include "qds/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return qds::cli::run(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "qclassical/cli.hpp"

int main(int argc, char** argv) { return qclassical::cli_main(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "econlab/cli/app.hpp"

int main(int argc, char** argv) { return econlab::cli::run(argc, argv, std::cout, std::cerr); }

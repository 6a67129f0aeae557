#include <iostream>

#include "ognn/cli.hpp"

int main(int argc, char** argv) { return ognn::cli::parse_and_run(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "gae/cli.hpp"

int main(int argc, char** argv) { return gae::cli::run(argc, argv, std::cout, std::cerr); }

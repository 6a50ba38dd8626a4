#include <iostream>

#include "abp/cli.hpp"

int main(int argc, char** argv) { return abp::cli::run(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "vmsync/cli.hpp"

int main(int argc, char** argv) { return vmsync::cli::main_entry(argc, argv, std::cout, std::cerr); }

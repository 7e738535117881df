#include <iostream>

#include "mstor/commands.hpp"

int main(int argc, char** argv) { return mstor::run_cli(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "eqwaves/cli.hpp"

int main(int argc, char** argv) { return eqw::run_cli(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "cuq/cli_app.hpp"

int main(int argc, char** argv) { return cuq::run_cli(argc, argv, std::cout, std::cerr); }

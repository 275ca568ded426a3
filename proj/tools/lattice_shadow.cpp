#include <iostream>
#include <string>
#include <vector>

#include "lattice_shadow/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return lattice_shadow::cli::run_command(std::move(args), std::cout, std::cerr);
}

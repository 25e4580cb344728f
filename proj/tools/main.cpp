#include <iostream>
#include <string>
#include <vector>

#include "pinnsolve/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return pinnsolve::cli::main(args, std::cout, std::cerr);
}

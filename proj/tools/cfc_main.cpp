#include <iostream>
#include <string>
#include <vector>

#include "cfc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cfc::cli::run(args, std::cout, std::cerr);
}

#include <iostream>
#include <string>
#include <vector>

#include "abxlab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return abxlab::cli::run(args, std::cout, std::cerr);
}

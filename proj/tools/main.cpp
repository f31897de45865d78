#include <iostream>

#include "litpipe/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return litpipe::cli::run(args, std::cout, std::cerr);
}

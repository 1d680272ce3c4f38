#include <iostream>

#include "segtopics/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return segtopics::cli::dispatch(args, std::cout, std::cerr);
}

#include <iostream>

#include "linedp/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return linedp::run_cli(args, std::cout, std::cerr);
}

#include <iostream>

#include "drrisk_cli/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return drrisk::cli::run_cli(args, std::cout, std::cerr);
}

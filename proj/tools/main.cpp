#include <iostream>
#include <string>
#include <vector>

#include "ctxspell/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ctxspell::cli::run(std::move(args), std::cin, std::cout, std::cerr);
}

#include <iostream>

#include "poischaos/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return poischaos::cli::run(args, std::cout, std::cerr);
}

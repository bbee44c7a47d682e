#include <iostream>
#include <string>
#include <vector>

#include "flowlab/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv, argv + argc);
    return flowlab::cli::run(args, std::cout, std::cerr);
}

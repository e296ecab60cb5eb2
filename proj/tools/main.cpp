#include <iostream>
#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv)
{
    varseg::cli::configure_logging();
    std::vector<std::string> args(argv + 1, argv + argc);
    return varseg::cli::run(args, std::cout, std::cerr);
}

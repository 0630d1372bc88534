#include "gg/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return gg::cli::run(argc, argv, std::cout, std::cerr);
}

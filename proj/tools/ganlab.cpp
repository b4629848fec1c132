#include "ganlab/runner.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return ganlab::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}

#include "myobench/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return myobench::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}

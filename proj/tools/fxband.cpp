#include "commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return fxband::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}

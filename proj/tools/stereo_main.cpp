#include <cstdlib>
#include <iostream>

#include "stereo/cli/app.hpp"

int main(int argc, char** argv) {
    return stereo::cli::run(argc, argv, {std::cout, std::cerr, [](const char* name) { return std::getenv(name); }});
}

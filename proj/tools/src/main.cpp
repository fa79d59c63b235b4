#include <iostream>

#include "basalt_cli/app.hpp"

int main(int argc, char** argv) {
    std::ios::sync_with_stdio(false);
    return basalt::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

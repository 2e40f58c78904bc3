#include "ssreg/harness/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return ssreg::harness::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

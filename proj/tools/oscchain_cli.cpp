#include <vector>

#include "oscchain/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return oscchain::cli::run(args);
}

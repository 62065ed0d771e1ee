#include <vector>
#include <string>

#include "rmlab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return rmlab::cli::dispatch(args);
}

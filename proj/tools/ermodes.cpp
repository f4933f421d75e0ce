#include <string>
#include <vector>

#include "ermodes/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ermodes::cli::run(args);
}

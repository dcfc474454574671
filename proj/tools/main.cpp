#include <string>
#include <vector>

#include "aerocell/cli.hpp"

int main(int argc, char** argv) {
    return aerocell::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}

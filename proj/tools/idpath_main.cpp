// Command-line driver; subcommands are wired up in config.hpp's runner.
#include <cstdio>

int main() {
    std::fprintf(stderr, "idpath: not yet wired\n");
    return 2;
}

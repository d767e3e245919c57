// Command-line front end; subcommands are filled in by cli.hpp.
#include <cstdio>

int main(int argc, char** argv) {
    (void)argc;
    (void)argv;
    std::puts("bcmpc: pipeline commands not wired up yet");
    return 1;
}

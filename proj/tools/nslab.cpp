#include <cstdio>

int main() {
    std::puts("nslab: subcommands arrive with the full build");
    return 0;
}

#include <cstdio>

int main() {
    std::puts("partweyl: placeholder");
    return 0;
}

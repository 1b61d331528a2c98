#include <cstdio>

int main() {
    std::puts("qas: placeholder");
    return 0;
}

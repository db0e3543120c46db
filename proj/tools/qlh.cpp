#include <cstdio>
int main() { std::puts("qlh placeholder"); return 0; }

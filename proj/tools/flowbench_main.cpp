#include <cstdio>
int main() { std::puts("flowbench"); return 0; }

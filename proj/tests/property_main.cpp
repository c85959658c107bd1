#include "properties.hpp"

int main() { return run_properties().passed() ? 0 : 1; }

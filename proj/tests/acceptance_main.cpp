// Acceptance suite runner: one line per criterion, nonzero exit on failure.

#include <iostream>

#include "cranebc/checks.hpp"

int main() {
    const int failures = cranebc::run_acceptance_suite(std::cout);
    return failures == 0 ? 0 : 1;
}

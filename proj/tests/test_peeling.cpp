#include <doctest.h>

TEST_SUITE("peeling") {}

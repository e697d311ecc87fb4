#include <doctest.h>

TEST_SUITE("simulate") {}

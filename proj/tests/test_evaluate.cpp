#include <doctest.h>

TEST_SUITE("evaluate") {}

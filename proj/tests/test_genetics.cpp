#include <doctest.h>

TEST_SUITE("genetics") {}

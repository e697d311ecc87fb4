#include <doctest.h>

TEST_SUITE("ascertainment") {}

#include <doctest.h>

TEST_SUITE("baseline") {}

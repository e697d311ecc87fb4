#include <doctest.h>

TEST_SUITE("riskmodel") {}

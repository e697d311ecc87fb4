#include <doctest.h>

TEST_SUITE("pedigree") {}

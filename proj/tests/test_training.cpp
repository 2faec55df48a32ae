#include <doctest.h>

TEST_CASE("placeholder_training") { CHECK(true); }

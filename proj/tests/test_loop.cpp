#include <doctest.h>

TEST_CASE("placeholder_loop") { CHECK(true); }

#include <doctest.h>

TEST_CASE("placeholder_gmad") { CHECK(true); }

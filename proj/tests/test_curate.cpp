#include <doctest.h>

TEST_CASE("placeholder_curate") { CHECK(true); }

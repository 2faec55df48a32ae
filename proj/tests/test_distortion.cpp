#include <doctest.h>

TEST_CASE("placeholder_distortion") { CHECK(true); }

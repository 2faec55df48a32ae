#include <doctest.h>

TEST_CASE("placeholder_annotate") { CHECK(true); }

#include <doctest.h>

TEST_CASE("placeholder_media_io") { CHECK(true); }

#include <doctest.h>

TEST_SUITE("core") {

TEST_CASE("placeholder") { CHECK(true); }

}

#include <doctest.h>

TEST_SUITE("config") {

TEST_CASE("placeholder") { CHECK(true); }

}

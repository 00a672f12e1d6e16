#include <doctest.h>

TEST_SUITE("attacks") {

TEST_CASE("placeholder") { CHECK(true); }

}

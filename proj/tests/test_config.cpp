// Key-value configuration parsing and list splitting.

#include <sstream>

#include "doctest.h"
#include "wsmatch/config.hpp"

using namespace wsmatch;

TEST_CASE("config parsing") {
  std::istringstream in(
      "# leading comment\n"
      "design = d1\n"
      "  rho=0.5   # trailing comment\n"
      "\n"
      "n = 400\n"
      "design = d2\n"  // later assignment wins
      "note = keep internal  spaces\n");
  const ConfigMap map = parse_config(in);
  REQUIRE(map.size() == 4);
  CHECK(map.at("design") == "d2");
  CHECK(map.at("rho") == "0.5");
  CHECK(map.at("n") == "400");
  CHECK(map.at("note") == "keep internal  spaces");
}

TEST_CASE("config errors") {
  std::istringstream no_eq("just words\n");
  CHECK_THROWS_AS(parse_config(no_eq), ConfigError);
  std::istringstream empty_key(" = value\n");
  CHECK_THROWS_AS(parse_config(empty_key), ConfigError);
  CHECK_THROWS_AS(parse_config_file("/nonexistent/path/wsmatch.cfg"), ConfigError);
  // The origin and line number are reported.
  std::istringstream bad("ok = 1\nbroken line\n");
  try {
    parse_config(bad, "test.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("test.cfg:2") != std::string::npos);
  }
}

TEST_CASE("list splitting") {
  const auto items = split_list(" a, b ,c,, d ");
  REQUIRE(items.size() == 4);
  CHECK(items[0] == "a");
  CHECK(items[1] == "b");
  CHECK(items[2] == "c");
  CHECK(items[3] == "d");
  CHECK(split_list("").empty());
  CHECK(split_list(" , ,").empty());
  REQUIRE(split_list("single").size() == 1);
  CHECK(split_list("single")[0] == "single");
}

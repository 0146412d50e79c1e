#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "bootci/table.hpp"

using namespace bootci;

TEST_CASE("reads a comma-delimited table with header") {
  std::istringstream in("x,y\n1,1\n2,2\n3,4\n");
  const RawTable t = read_table(in, ',');
  REQUIRE(t.header == std::vector<std::string>{"x", "y"});
  REQUIRE(t.rows() == 3);
  CHECK(t.columns[1][2] == 4.0);
}

TEST_CASE("tab delimiter and surrounding whitespace") {
  std::istringstream in("a\tb\n 1 \t2\n3\t 4\n");
  const RawTable t = read_table(in, '\t');
  CHECK(t.columns[0][0] == 1.0);
  CHECK(t.columns[1][1] == 4.0);
}

TEST_CASE("non-numeric cells carry row and column locations") {
  std::istringstream in("x,y\n1,1\n2,oops\n");
  try {
    read_table(in, ',');
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
    CHECK(msg.find("oops") != std::string::npos);
  }
}

TEST_CASE("field count mismatches are parse errors") {
  std::istringstream in("x,y\n1,2,3\n");
  CHECK_THROWS_AS(read_table(in, ','), ParseError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_table(empty, ','), ParseError);
  std::istringstream headeronly("x,y\n");
  CHECK_THROWS_AS(read_table(headeronly, ','), ParseError);
}

TEST_CASE("dataset construction picks the response by name") {
  std::istringstream in("x,y,z\n1,10,5\n2,20,6\n3,30,7\n4,40,8\n");
  const RawTable t = read_table(in, ',');
  const Dataset d = dataset_from_table(t, "y");
  REQUIRE(d.k() == 3);  // intercept + x + z
  CHECK(d.coef_names()[0] == "(intercept)");
  CHECK(d.coef_names()[1] == "x");
  CHECK(d.coef_names()[2] == "z");
  CHECK(d.y(1) == 20.0);
  CHECK(d.x(1, 1) == 2.0);
  CHECK(d.x(1, 2) == 6.0);
  CHECK_THROWS_AS(dataset_from_table(t, "nope"), ParseError);
}

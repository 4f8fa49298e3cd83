#include <doctest.h>

#include "test_util.hpp"
#include "triage/common.hpp"

using namespace triage;

TEST_SUITE("common") {

TEST_CASE("timestamps round-trip and fold offsets") {
  auto t = parse_timestamp("2021-03-04T05:06:07Z");
  CHECK(format_timestamp(t) == "2021-03-04T05:06:07Z");
  CHECK(parse_timestamp("2021-03-04T07:06:07+02:00") == t);
  CHECK(parse_timestamp("2021-03-04T05:06:07.250Z") == t);
  CHECK(hours_between(t, parse_timestamp("2021-03-04T17:06:07Z")) == doctest::Approx(12.0));
  CHECK(days_between(parse_timestamp("2021-03-01T00:00:00Z"), t) == doctest::Approx(3.0 + 18367.0 / 86400.0));
  CHECK_THROWS_AS(parse_timestamp("2021-13-01T00:00:00Z"), Error);
  CHECK_THROWS_AS(parse_timestamp("yesterday"), Error);
}

TEST_CASE("sha256 of known vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("csv parsing handles quotes, commas and newlines") {
  auto rows = parse_csv("a,b,c\n\"x,1\",\"he said \"\"hi\"\"\",\"two\nlines\"\n\n3,,\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][0] == "x,1");
  CHECK(rows[1][1] == "he said \"hi\"");
  CHECK(rows[1][2] == "two\nlines");
  CHECK(rows[2] == std::vector<std::string>{"3", "", ""});
  CHECK_THROWS_AS(parse_csv("\"open"), Error);
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("q\"") == "\"q\"\"\"");
  auto back = parse_csv(csv_escape("x,\"y\"\nz") + "\n");
  CHECK(back[0][0] == "x,\"y\"\nz");
}

TEST_CASE("string helpers") {
  CHECK(trim("  a b \t") == "a b");
  CHECK(to_lower("MiXeD") == "mixed");
  CHECK(split_whitespace("  a  b\tc\n") == std::vector<std::string>{"a", "b", "c"});
  CHECK(utf8_length("caf\xc3\xa9") == 4);
}

TEST_CASE("mix_seed gives distinct deterministic streams") {
  CHECK(mix_seed(42, 1) == mix_seed(42, 1));
  CHECK(mix_seed(42, 1) != mix_seed(42, 2));
  CHECK(mix_seed(42, 1) != mix_seed(43, 1));
}

TEST_CASE("atomic write replaces content") {
  auto dir = testutil::temp_dir("common");
  auto p = dir / "f.txt";
  write_file_atomic(p, "one");
  write_file_atomic(p, "two");
  CHECK(read_file(p) == "two");
  CHECK(sha256_file(p) == sha256_hex("two"));
  CHECK_THROWS_AS(read_file(dir / "missing"), Error);
}

}

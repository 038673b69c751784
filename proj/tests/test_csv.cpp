#include "vcnet/csv.hpp"

#include <doctest.h>

#include <charconv>
#include <sstream>
#include <string>
#include <vector>

using namespace vcnet;

TEST_SUITE("csv") {

TEST_CASE("reads plain comma records") {
  std::istringstream in("a,b,c\n1,2,3\n");
  CsvReader reader(in);
  std::vector<std::string> fields;
  REQUIRE(reader.next_record(fields));
  CHECK(fields == std::vector<std::string>{"a", "b", "c"});
  CHECK(reader.record_number() == 1);
  REQUIRE(reader.next_record(fields));
  CHECK(fields == std::vector<std::string>{"1", "2", "3"});
  CHECK(reader.record_number() == 2);
  CHECK_FALSE(reader.next_record(fields));
}

TEST_CASE("quoted fields keep separators, escapes, and newlines") {
  std::istringstream in("\"a,b\",\"say \"\"hi\"\"\",\"two\nlines\"\n");
  CsvReader reader(in);
  std::vector<std::string> fields;
  REQUIRE(reader.next_record(fields));
  REQUIRE(fields.size() == 3);
  CHECK(fields[0] == "a,b");
  CHECK(fields[1] == "say \"hi\"");
  CHECK(fields[2] == "two\nlines");
}

TEST_CASE("accepts CRLF terminators") {
  std::istringstream in("x,y\r\n1,2\r\n");
  CsvReader reader(in);
  std::vector<std::string> fields;
  REQUIRE(reader.next_record(fields));
  CHECK(fields == std::vector<std::string>{"x", "y"});
  REQUIRE(reader.next_record(fields));
  CHECK(fields == std::vector<std::string>{"1", "2"});
  CHECK_FALSE(reader.next_record(fields));
}

TEST_CASE("last record without trailing newline is returned") {
  std::istringstream in("a,b");
  CsvReader reader(in);
  std::vector<std::string> fields;
  REQUIRE(reader.next_record(fields));
  CHECK(fields == std::vector<std::string>{"a", "b"});
  CHECK_FALSE(reader.next_record(fields));
}

TEST_CASE("empty fields survive the round trip") {
  std::istringstream in(",,\n");
  CsvReader reader(in);
  std::vector<std::string> fields;
  REQUIRE(reader.next_record(fields));
  CHECK(fields == std::vector<std::string>{"", "", ""});
}

TEST_CASE("escape quotes only when needed") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("He said \"no\"") == "\"He said \"\"no\"\"\"");
  CHECK(csv_escape("line\nbreak") == "\"line\nbreak\"");
}

TEST_CASE("write then read returns the original fields") {
  std::vector<std::string> fields{"id", "a,b", "\"q\"", "multi\nline", ""};
  std::ostringstream out;
  write_csv_record(out, fields);
  std::istringstream in(out.str());
  CsvReader reader(in);
  std::vector<std::string> back;
  REQUIRE(reader.next_record(back));
  CHECK(back == fields);
}

TEST_CASE("format_double round-trips bitwise") {
  for (double v : {0.0, 1.0, -1.5, 0.1, 1e-12, 3.141592653589793, 5e6, 1.7976931348623157e308}) {
    const std::string s = format_double(v);
    double back = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), back);
    REQUIRE(ec == std::errc());
    CHECK(ptr == s.data() + s.size());
    CHECK(back == v);
  }
  CHECK(format_double(5e6) == "5e+06");
  CHECK(format_double(2.0) == "2");
}

} // TEST_SUITE

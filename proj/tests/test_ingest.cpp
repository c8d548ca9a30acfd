#include <gtest/gtest.h>

#include <sstream>

#include "spoofdet/errors.hpp"
#include "spoofdet/ingest.hpp"
#include "support.hpp"

using namespace spoofdet;
using spoofdet::testing::upd;

namespace {

std::string error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    read_ndjson(in);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Ingest, FormatsUpdatesWithFixedFieldOrder) {
  EXPECT_EQ(format_update_json(upd(3, 1700000000000, Side::Ask, "101.50", "0.25")),
            R"({"seq":3,"ts":1700000000000,"side":"ask","price":"101.5","size":"0.25"})");
}

TEST(Ingest, ParsesUpdatesAndSnapshot) {
  std::istringstream in(
      R"({"seq":0,"ts":5,"type":"snapshot","bids":[["100","2"]],"asks":[["101","1"],["102","4"]]})"
      "\n"
      R"({"seq":1,"ts":6,"side":"bid","price":"100","size":"0"})"
      "\n\n"
      R"({"ts":7,"seq":2,"size":"3","price":"99.5","side":"bid"})"
      "\n");
  const auto s = read_ndjson(in);
  ASSERT_TRUE(s.snapshot);
  EXPECT_EQ(s.snapshot->asks.size(), 2u);
  ASSERT_EQ(s.updates.size(), 2u);
  EXPECT_EQ(s.updates[1].price, Price::parse("99.5"));
  EXPECT_EQ(s.updates[1].size, Volume::parse("3"));
}

TEST(Ingest, EmptyInputIsEmptyStream) {
  std::istringstream in("");
  const auto s = read_ndjson(in);
  EXPECT_FALSE(s.snapshot);
  EXPECT_TRUE(s.updates.empty());
}

TEST(Ingest, ErrorsCarryLineNumbers) {
  const std::string ok = R"({"seq":1,"ts":1,"side":"bid","price":"1","size":"1"})" "\n";
  EXPECT_NE(error_of(ok + "{not json\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of(ok + R"({"seq":2,"ts":1,"side":"buy","price":"1","size":"1"})").find("line 2"),
            std::string::npos);
  EXPECT_NE(error_of(ok + R"({"seq":1,"ts":2,"side":"bid","price":"1","size":"1"})").find("line 2"),
            std::string::npos);
  EXPECT_NE(error_of(ok + R"({"seq":2,"ts":0,"side":"bid","price":"1","size":"1"})").find("line 2"),
            std::string::npos);
  EXPECT_NE(error_of(ok + R"({"seq":2,"ts":2,"side":"bid","price":"0","size":"1"})").find("line 2"),
            std::string::npos);
  EXPECT_NE(error_of(ok + R"({"seq":2,"ts":2,"side":"bid","price":"1","size":"-1"})").find("line 2"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"seq":1,"ts":2,"side":"bid","price":"1"})").find("line 1"), std::string::npos);
}

TEST(Ingest, NdjsonAndCsvRoundTrip) {
  Rng rng(5);
  UpdateStream s;
  s.updates = spoofdet::testing::random_stream(rng, {.updates = 500});
  std::stringstream nd;
  write_ndjson(nd, s);
  EXPECT_EQ(read_ndjson(nd).updates, s.updates);
  std::stringstream csv;
  write_csv(csv, s.updates);
  EXPECT_EQ(read_csv(csv).updates, s.updates);
}

TEST(Ingest, CsvRequiresHeader) {
  std::istringstream in("1,2,bid,100,1\n");
  EXPECT_THROW(read_csv(in), DataError);
}

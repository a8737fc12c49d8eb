#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "ceca/encoding.hpp"
#include "ceca/error.hpp"
#include "ceca/eventlog.hpp"
#include "ceca/timestamp.hpp"

using namespace ceca;

namespace {

ColumnMapping mapping(std::vector<AttributeSpec> attrs = {}) {
  ColumnMapping m;
  m.attributes = std::move(attrs);
  return m;
}

const std::string kLog =
    "case,activity,timestamp,status,cost\n"
    "c1,Create,2012-01-01T10:00:00Z,open,5\n"
    "c2,Create,2012-01-01T09:00:00Z,open,\n"
    "c1,Approve,2012-01-01T11:00:00Z,done,7.5\n"
    "c1,Ship,2012-01-01T10:30:00Z,done,1\n"
    "c2,Reject,2012-01-01T09:30:00Z,,2\n";

}  // namespace

TEST_CASE("ISO-8601 timestamps") {
  CHECK(parse_iso8601("1970-01-01")->millis == 0);
  CHECK(parse_iso8601("1970-01-01T00:00:01Z")->millis == 1000);
  CHECK(parse_iso8601("1970-01-01 00:00:01.250")->millis == 1250);
  CHECK(parse_iso8601("1970-01-01T01:00:00+01:00")->millis == 0);
  CHECK(parse_iso8601("1970-01-01T00:00:00-0130")->millis == 5'400'000);
  CHECK(parse_iso8601("2012-02-29T12:30")->millis == 1'330'518'600'000);
  CHECK_FALSE(parse_iso8601("2013-02-29"));
  CHECK_FALSE(parse_iso8601("yesterday"));
  CHECK_FALSE(parse_iso8601("2012-01-01T25:00:00"));
  CHECK(format_iso8601(Timestamp{1'330'518'600'000}) == "2012-02-29T12:30:00Z");
  CHECK(format_iso8601(Timestamp{1250}) == "1970-01-01T00:00:01.250Z");
  CHECK(parse_with_format("01/02/2012 10:00", "%d/%m/%Y %H:%M")->millis ==
        parse_iso8601("2012-02-01T10:00:00Z")->millis);
  CHECK_FALSE(parse_with_format("garbage", "%d/%m/%Y"));
}

TEST_CASE("CSV parsing groups traces and orders events") {
  const auto log = parse_csv_string(kLog, mapping({{"status", AttributeKind::kCategorical},
                                                   {"cost", AttributeKind::kNumeric}}));
  REQUIRE(log.traces.size() == 2);
  CHECK(log.traces[0].case_id == "c1");
  CHECK(log.traces[0].events[1].activity == "Ship");
  CHECK(log.traces[0].events[2].activity == "Approve");
  CHECK(std::get<double>(log.traces[0].events[2].attributes.at("cost")) == 7.5);
  CHECK(log.traces[1].events[0].attributes.count("cost") == 0);
  CHECK(log.traces[1].events[1].attributes.count("status") == 0);
  CHECK(log.num_events() == 5);
  CHECK(log.find_attribute("cost")->kind == AttributeKind::kNumeric);
  CHECK(log.find_attribute("nope") == nullptr);
}

TEST_CASE("CSV dialect: quotes, CRLF, BOM, embedded separators") {
  const std::string text =
      "\xEF\xBB\xBF" "case,activity,timestamp\r\n"
      "\"c,1\",\"Say \"\"hi\"\"\",2012-01-01\r\n"
      "\"c,1\",\"multi\nline\",2012-01-02\r\n";
  const auto log = parse_csv_string(text, mapping());
  REQUIRE(log.traces.size() == 1);
  CHECK(log.traces[0].case_id == "c,1");
  CHECK(log.traces[0].events[0].activity == "Say \"hi\"");
  CHECK(log.traces[0].events[1].activity == "multi\nline");
}

TEST_CASE("equal timestamps keep input order") {
  const auto log = parse_csv_string(
      "case,activity,timestamp\nc,X,2012-01-01\nc,Y,2012-01-01\nc,Z,2011-01-01\n", mapping());
  CHECK(log.traces[0].events[0].activity == "Z");
  CHECK(log.traces[0].events[1].activity == "X");
  CHECK(log.traces[0].events[2].activity == "Y");
}

TEST_CASE("CSV errors") {
  CHECK_THROWS_AS(parse_csv_string("case,activity\nc,A\n", mapping()), DataError);
  CHECK_THROWS_AS(parse_csv_string(kLog, mapping({{"missing", AttributeKind::kCategorical}})),
                  DataError);
  auto row_line = [](const std::string& text, const ColumnMapping& m) -> std::size_t {
    try {
      parse_csv_string(text, m);
    } catch (const RowError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(row_line("case,activity,timestamp\nc,A,2012-01-01\nc,,2012-01-01\n", mapping()) == 3);
  CHECK(row_line("case,activity,timestamp\nc,A,soon\n", mapping()) == 2);
  CHECK(row_line("case,activity,timestamp\nc,A\n", mapping()) == 2);
  CHECK(row_line(kLog, mapping({{"status", AttributeKind::kNumeric}})) == 2);
  CHECK_THROWS_AS(parse_csv_string("", mapping()), DataError);
}

TEST_CASE("custom column names and timestamp format") {
  ColumnMapping m;
  m.case_col = "id";
  m.activity_col = "act";
  m.timestamp_col = "when";
  m.timestamp_format = "%d.%m.%Y %H:%M";
  const auto log = parse_csv_string("act,id,when\nA,1,02.01.2012 10:00\nB,1,01.01.2012 10:00\n", m);
  CHECK(log.traces[0].events[0].activity == "B");
}

TEST_CASE("CSV write then read preserves the log") {
  const auto m = mapping({{"status", AttributeKind::kCategorical},
                          {"cost", AttributeKind::kNumeric}});
  const auto log = parse_csv_string(kLog, m);
  const auto again = parse_csv_string(write_csv_string(log), m);
  CHECK(again == log);
}

TEST_CASE("short traces are filtered and counted") {
  const auto log = parse_csv_string(kLog, mapping());
  const auto r = filter_short_traces(log, 3);
  CHECK(r.original == 2);
  CHECK(r.removed == 1);
  CHECK(r.removed_fraction() == 0.5);
  CHECK(r.log.traces.size() == 1);
  CHECK(filter_short_traces(log, 0).removed == 0);
}

TEST_CASE("equal-width discretization") {
  DiscretizationSpec s{"x", 4, 0.0, 8.0};
  CHECK(s.bin(0.0) == 0);
  CHECK(s.bin(1.99) == 0);
  CHECK(s.bin(2.0) == 1);
  CHECK(s.bin(8.0) == 3);
  CHECK(s.bin(-5.0) == 0);
  CHECK(s.bin(50.0) == 3);
  CHECK(DiscretizationSpec{"x", 4, 3.0, 3.0}.bin(3.0) == 0);
  CHECK(DiscretizationSpec::label(7) == "bin_7");

  const auto log = parse_csv_string(kLog, mapping({{"cost", AttributeKind::kNumeric}}));
  const auto [binned, spec] = discretize_attribute(log, "cost", 2);
  CHECK(spec.lo == 1.0);
  CHECK(spec.hi == 7.5);
  CHECK(binned.find_attribute("cost")->kind == AttributeKind::kCategorical);
  CHECK(std::get<std::string>(binned.traces[0].events[2].attributes.at("cost")) == "bin_1");
  CHECK(std::get<std::string>(binned.traces[0].events[1].attributes.at("cost")) == "bin_0");
  CHECK(binned.traces[1].events[0].attributes.count("cost") == 0);
  CHECK(apply_discretization(log, spec) == binned);

  CHECK_THROWS_AS(discretize_attribute(log, "status", 2), ConfigError);
  const auto cat = parse_csv_string(kLog, mapping({{"status", AttributeKind::kCategorical}}));
  CHECK_THROWS_AS(discretize_attribute(cat, "status", 2), ConfigError);
}

TEST_CASE("end marker") {
  const auto log = append_end_event(parse_csv_string(kLog, mapping()), "[END]");
  CHECK(log.traces[0].events.back().activity == "[END]");
  CHECK(log.traces[0].events.back().timestamp >= log.traces[0].events[2].timestamp);
  CHECK(log.num_events() == 7);
}

TEST_CASE("seeded trace-level split") {
  const auto [tr, te] = split_indices(10, 0.7, 3);
  CHECK(tr.size() == 7);
  CHECK(te.size() == 3);
  CHECK(std::is_sorted(tr.begin(), tr.end()));
  std::vector<std::size_t> all(tr);
  all.insert(all.end(), te.begin(), te.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 10; ++i) CHECK(all[i] == i);
  CHECK(split_indices(10, 0.7, 3) == split_indices(10, 0.7, 3));
  CHECK_FALSE(split_indices(50, 0.5, 3) == split_indices(50, 0.5, 4));
  CHECK_THROWS_AS(split_indices(1, 0.7, 0), ConfigError);
  CHECK_THROWS_AS(split_indices(10, 1.0, 0), ConfigError);
  CHECK_THROWS_AS(split_log(EventLog{}, 0.5, 0), ConfigError);
}

TEST_CASE("role encoding") {
  const auto log = parse_csv_string(kLog, mapping({{"status", AttributeKind::kCategorical},
                                                   {"cost", AttributeKind::kNumeric}}));
  const auto enc = encode_log(log, Roles{"status", std::nullopt});
  const auto& bg = enc.vocabulary.background->values;
  CHECK(enc.vocabulary.activity.values() ==
        std::vector<std::string>{"Create", "Ship", "Approve", "Reject"});
  CHECK(bg.values() == std::vector<std::string>{"open", "done"});
  CHECK(enc.traces[1].slices[1].background == bg.missing());
  CHECK_FALSE(enc.has_symptom());
  CHECK(enc.num_slices() == 5);

  const auto other = parse_csv_string(
      "case,activity,timestamp,status\nz,Create,2012-01-01,weird\nz,New,2012-01-02,open\n",
      mapping({{"status", AttributeKind::kCategorical}}));
  const auto enc2 = encode_log(other, enc.vocabulary);
  CHECK(enc2.traces[0].slices[0].background == bg.other());
  CHECK(enc2.traces[0].slices[1].event == enc.vocabulary.activity.other());

  CHECK_THROWS_AS(encode_log(log, Roles{"status", "status"}), ConfigError);
  CHECK_THROWS_AS(encode_log(log, Roles{"nope", std::nullopt}), ConfigError);
  CHECK_THROWS_AS(encode_log(log, Roles{"cost", std::nullopt}), ConfigError);
}

TEST_CASE("vocabulary reserved symbols") {
  VariableVocabulary v({"a", "b"});
  CHECK(v.size() == 4);
  CHECK(v.encode("b") == 1);
  CHECK(v.encode("zzz") == v.other());
  CHECK(v.decode(v.missing()) == "<MISSING>");
  CHECK(v.decode(v.other()) == "<OTHER>");
  CHECK(v.add("a") == 0);
  CHECK_FALSE(v.find("zzz"));
  CHECK_THROWS(v.decode(9));
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "techcast/ingest.hpp"

using namespace techcast;
using namespace techcast::ingest;

namespace {

std::string record(const std::string& id, const std::string& cats, const std::vector<std::string>& created) {
    std::string versions;
    for (std::size_t i = 0; i < created.size(); ++i) {
        if (i) versions += ",";
        versions += R"({"version":"v)" + std::to_string(i + 1) + R"(","created":")" + created[i] + "\"}";
    }
    return R"({"id":")" + id + R"(","categories":")" + cats + R"(","versions":[)" + versions + "]}";
}

EprintRecord rec(const std::string& cat, int y, int m) { return {cat + std::to_string(y * 12 + m), cat, {y, m}}; }

std::filesystem::path temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "techcast_unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("YearMonth arithmetic and parsing") {
    const YearMonth m{2007, 12};
    CHECK((m + 1).to_string() == "2008-01");
    CHECK((YearMonth{2008, 3} - m) == 3);
    CHECK(YearMonth::parse("1999-07")->to_string() == "1999-07");
    CHECK_FALSE(YearMonth::parse("1999-13"));
    CHECK_FALSE(YearMonth::parse("1999-7"));
    CHECK_FALSE(YearMonth::parse("abcd-01"));
}

TEST_CASE("RFC-2822 timestamps map to the UTC month") {
    CHECK(parse_rfc2822_month("Mon, 2 Apr 2007 19:18:42 GMT")->to_string() == "2007-04");
    CHECK(parse_rfc2822_month("Thu, 1 Feb 2007 00:30:00 +0100")->to_string() == "2007-01");
    CHECK(parse_rfc2822_month("Sat, 31 Dec 2005 23:30:00 -0100")->to_string() == "2006-01");
    CHECK(parse_rfc2822_month("29 Feb 2008 10:00:00 GMT")->to_string() == "2008-02");
    CHECK_FALSE(parse_rfc2822_month("Fri, 29 Feb 2007 10:00:00 GMT"));
    CHECK_FALSE(parse_rfc2822_month("yesterday"));
}

TEST_CASE("parse_record takes the earliest version and the first category") {
    const auto r = parse_record(record("0704.0001", "hep-ph math.CO",
                                       {"Tue, 10 Jul 2007 10:00:00 GMT", "Mon, 2 Apr 2007 19:18:42 GMT"}));
    REQUIRE(r);
    CHECK(r->id == "0704.0001");
    CHECK(r->primary_category == "hep-ph");
    CHECK(r->first_version_month == YearMonth{2007, 4});

    CHECK_FALSE(parse_record("{\"id\": 1"));
    CHECK_FALSE(parse_record(R"({"id":"x","categories":"cs.AI","versions":[]})"));
    CHECK_FALSE(parse_record(R"({"id":"x","versions":[{"created":"Mon, 2 Apr 2007 19:18:42 GMT"}]})"));
    CHECK_FALSE(parse_record(record("old", "hep-th", {"Tue, 1 Jan 1985 10:00:00 GMT"})));
}

TEST_CASE("builder zero-fills, trims the snapshot month and drops short categories") {
    std::vector<EprintRecord> recs{rec("a", 2010, 1), rec("a", 2010, 1), rec("a", 2010, 4), rec("b", 2010, 3),
                                   rec("a", 2010, 6)};
    BuildOptions opts;
    opts.min_length = 4;
    const auto out = build_series(recs, opts);
    REQUIRE(out.series.size() == 1);
    CHECK(out.series[0].category_id == "a");
    CHECK(out.series[0].start_month == YearMonth{2010, 1});
    CHECK(out.series[0].values == std::vector<std::int64_t>{2, 0, 0, 1, 0});
    CHECK(out.summary.snapshot_end_month == YearMonth{2010, 6});
    CHECK(out.summary.n_out_of_range == 1);
    CHECK(out.summary.dropped_categories.at("b") == 3);
    CHECK(out.summary.n_in_dropped_categories == 1);

    opts.snapshot_end = YearMonth{2010, 5};
    const auto early = build_series(recs, opts);
    CHECK(early.series[0].values == std::vector<std::int64_t>{2, 0, 0, 1});
    CHECK(early.summary.n_out_of_range == 1);

    opts.min_length = 0;
    CHECK_THROWS_AS((void)build_series(recs, opts), std::invalid_argument);
    CHECK_THROWS_AS((void)build_series({}, BuildOptions{}), std::runtime_error);
}

TEST_CASE("summary counts account for every record") {
    const auto path = std::filesystem::path(TECHCAST_FIXTURE_DIR) / "snapshot_small.jsonl";
    BuildOptions opts;
    opts.min_length = 12;
    const auto out = ingest_file(path, opts);

    std::ifstream in(path);
    std::size_t lines = 0;
    for (std::string l; std::getline(in, l);) lines += !l.empty();

    std::uint64_t kept = 0;
    for (const auto& s : out.series) kept += std::accumulate(s.values.begin(), s.values.end(), std::uint64_t{0});
    CHECK(out.summary.n_records_read == lines);
    CHECK(out.summary.n_records_read == kept + out.summary.n_records_skipped);
    CHECK(out.summary.n_malformed == 3);
    CHECK(out.series.size() == 3);
    for (const auto& s : out.series) CHECK(s.end_month() == YearMonth{2019, 11});
}

TEST_CASE("series CSV round trip") {
    std::vector<MonthlySeries> s{{"b.X", {1999, 11}, {0, 3, 5}}, {"a.Y", {2001, 1}, {7}}};
    std::ostringstream out;
    write_series_csv(out, s);
    CHECK(out.str() == "category,month,count\na.Y,2001-01,7\nb.X,1999-11,0\nb.X,1999-12,3\nb.X,2000-01,5\n");

    std::istringstream in(out.str());
    const auto back = read_series_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == s[1]);
    CHECK(back[1] == s[0]);

    const auto path = temp_path("series.csv");
    persist_series(s, path);
    CHECK(load_series(path).size() == 2);
    CHECK_THROWS((void)persist_series(std::vector<MonthlySeries>{}, path));
}

TEST_CASE("reading rejects gaps and bad rows") {
    std::istringstream gap("category,month,count\na,2001-01,1\na,2001-03,1\n");
    CHECK_THROWS_AS((void)read_series_csv(gap), std::runtime_error);
    std::istringstream neg("category,month,count\na,2001-01,-1\n");
    CHECK_THROWS_AS((void)read_series_csv(neg), std::runtime_error);
    std::istringstream header("cat,month,count\n");
    CHECK_THROWS_AS((void)read_series_csv(header), std::runtime_error);
}

TEST_CASE("gzip input is detected by magic bytes") {
    const auto plain = std::filesystem::path(TECHCAST_FIXTURE_DIR) / "snapshot_small.jsonl";
    CHECK_FALSE(is_gzip_file(plain));
    CHECK_THROWS_AS((void)ingest_file(temp_path("does-not-exist.jsonl"), BuildOptions{}), std::runtime_error);
}

TEST_CASE("worked record examples") {
    const auto r = parse_record(
        R"({"id":"0704.0001","categories":"cs.LG stat.ML","versions":[{"created":"Mon, 2 Apr 2007 19:18:42 GMT"}]})");
    REQUIRE(r);
    CHECK(r->primary_category == "cs.LG");
    CHECK(r->first_version_month == YearMonth{2007, 4});
    CHECK_FALSE(parse_record(record("x", "", {"Mon, 2 Apr 2007 19:18:42 GMT"})));
    const auto two = parse_record(record("y", "cs.LG", {"Mon, 2 Apr 2007 19:18:42 GMT", "Thu, 1 Jan 2009 08:00:00 GMT"}));
    REQUIRE(two);
    CHECK(two->first_version_month == YearMonth{2007, 4});
}

TEST_CASE("counting example with an explicit snapshot end") {
    std::vector<EprintRecord> recs{rec("cs.LG", 2007, 4), rec("cs.LG", 2007, 4), rec("cs.LG", 2007, 4),
                                   rec("cs.LG", 2007, 6)};
    BuildOptions opts;
    opts.min_length = 1;
    opts.snapshot_end = YearMonth{2007, 8};
    const auto out = build_series(recs, opts);
    REQUIRE(out.series.size() == 1);
    CHECK(out.series[0].start_month == YearMonth{2007, 4});
    CHECK(out.series[0].values == std::vector<std::int64_t>{3, 0, 1, 0});
}

TEST_CASE("a 50-month category is dropped at the default threshold") {
    std::vector<EprintRecord> recs;
    for (int i = 0; i < 130; ++i) recs.push_back(rec("long", 2000 + i / 12, 1 + i % 12));
    // The last 50 complete months before the 2010-10 snapshot month.
    for (int i = 0; i < 50; ++i) {
        const YearMonth m = YearMonth{2010, 9} + (i - 49);
        recs.push_back(rec("short", m.year(), m.month()));
    }
    const auto out = build_series(recs, BuildOptions{});
    REQUIRE(out.series.size() == 1);
    CHECK(out.series[0].category_id == "long");
    CHECK(out.series[0].values.size() == 129);
    CHECK(out.summary.dropped_categories.at("short") == 50);
}

TEST_CASE("CSV rows for the worked series") {
    std::ostringstream out;
    write_series_csv(out, std::vector<MonthlySeries>{{"cs.LG", {2007, 4}, {3, 0, 1}}});
    CHECK(out.str() == "category,month,count\ncs.LG,2007-04,3\ncs.LG,2007-05,0\ncs.LG,2007-06,1\n");
}

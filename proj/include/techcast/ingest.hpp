#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "techcast/series.hpp"

namespace techcast::ingest {

/// Earliest month accepted for an e-print; arXiv opened in the early 1990s,
/// older dates are treated as corrupt.
inline constexpr YearMonth kEarliestMonth{1986, 1};

/// Smallest series that fits an established window (2n/3 history) plus 36
/// months of actuals.
inline constexpr std::size_t kDefaultMinLength = 108;

struct EprintRecord {
    std::string id;
    std::string primary_category;
    YearMonth first_version_month;
};

/// Parses one JSON-lines metadata object. Returns nullopt for records that are
/// missing `id`, `categories` or a parseable `versions[].created`.
std::optional<EprintRecord> parse_record(std::string_view line);

/// Parses an RFC-2822 timestamp ("Mon, 2 Apr 2007 19:18:42 GMT") and returns
/// its UTC calendar month.
std::optional<YearMonth> parse_rfc2822_month(std::string_view text);

struct CorpusSummary {
    std::uint64_t n_records_read = 0;
    /// Everything not counted into a kept series: malformed lines, records at
    /// or after the snapshot month, records of dropped categories.
    std::uint64_t n_records_skipped = 0;
    std::uint64_t n_malformed = 0;
    std::uint64_t n_out_of_range = 0;
    std::uint64_t n_in_dropped_categories = 0;
    std::map<std::string, std::size_t> categories;
    std::map<std::string, std::size_t> dropped_categories;
    YearMonth snapshot_end_month;
};

nlohmann::json to_json(const CorpusSummary& summary);

struct BuildOptions {
    std::size_t min_length = kDefaultMinLength;
    /// Month of the snapshot; it is incomplete and therefore not counted.
    /// Defaults to the latest month seen in the input.
    std::optional<YearMonth> snapshot_end;
};

struct BuildResult {
    std::vector<MonthlySeries> series;  // sorted by category_id
    CorpusSummary summary;
};

/// Streaming accumulator; records may arrive in any order.
class SeriesBuilder {
public:
    void add(const EprintRecord& record);
    void add_skipped() { ++n_read_, ++n_malformed_; }

    /// Throws std::invalid_argument for min_length == 0 and std::runtime_error
    /// ("empty corpus") when no record was added.
    [[nodiscard]] BuildResult finish(const BuildOptions& options) const;

private:
    std::map<std::string, std::map<int, std::uint64_t>> counts_;
    std::uint64_t n_read_ = 0;
    std::uint64_t n_malformed_ = 0;
    std::optional<YearMonth> latest_;
};

BuildResult build_series(std::span<const EprintRecord> records, const BuildOptions& options);

/// Reads JSON-lines from a stream; malformed lines are counted and skipped.
BuildResult ingest_stream(std::istream& in, const BuildOptions& options);

/// Reads a JSON-lines file, transparently decompressing gzip input (detected by
/// magic bytes). Throws std::runtime_error on I/O failure.
BuildResult ingest_file(const std::filesystem::path& path, const BuildOptions& options);

bool is_gzip_file(const std::filesystem::path& path);

/// Canonical CSV: `category,month,count` header, rows sorted by (category,
/// month), LF line endings.
void write_series_csv(std::ostream& out, std::span<const MonthlySeries> series);
void persist_series(std::span<const MonthlySeries> series, const std::filesystem::path& path);

/// Inverse of write_series_csv. Throws std::runtime_error on malformed input,
/// including gaps between months of a category.
std::vector<MonthlySeries> read_series_csv(std::istream& in);
std::vector<MonthlySeries> load_series(const std::filesystem::path& path);

void write_summary_json(const CorpusSummary& summary, const std::filesystem::path& path);

}  // namespace techcast::ingest

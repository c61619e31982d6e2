#include "techcast/ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace techcast::ingest {
namespace {

// Howard Hinnant's days_from_civil / civil_from_days.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr std::pair<std::int64_t, unsigned> year_month_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {y + (m <= 2), m};
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> kDays{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && is_leap(y) ? 29 : kDays[static_cast<std::size_t>(m - 1)];
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

int month_from_name(std::string_view name) {
    static constexpr std::array<std::string_view, 12> kNames{
        "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
    if (name.size() < 3) return 0;
    std::string lower(name.substr(0, 3));
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (std::size_t i = 0; i < kNames.size(); ++i)
        if (kNames[i] == lower) return static_cast<int>(i) + 1;
    return 0;
}

// Offset from UTC in minutes.
std::optional<int> parse_zone(std::string_view zone) {
    if (zone == "GMT" || zone == "UT" || zone == "UTC" || zone == "Z") return 0;
    if (zone == "EST") return -5 * 60;
    if (zone == "EDT") return -4 * 60;
    if (zone == "CST") return -6 * 60;
    if (zone == "CDT") return -5 * 60;
    if (zone == "MST") return -7 * 60;
    if (zone == "MDT") return -6 * 60;
    if (zone == "PST") return -8 * 60;
    if (zone == "PDT") return -7 * 60;
    if (zone.size() == 5 && (zone[0] == '+' || zone[0] == '-')) {
        int hh = 0;
        int mm = 0;
        if (!parse_int(zone.substr(1, 2), hh) || !parse_int(zone.substr(3, 2), mm)) return std::nullopt;
        const int off = hh * 60 + mm;
        return zone[0] == '+' ? off : -off;
    }
    return std::nullopt;
}

// Minutes since the epoch, for ordering versions.
std::optional<std::int64_t> parse_rfc2822_minutes(std::string_view text) {
    auto tokens = split_ws(text);
    if (!tokens.empty() && tokens[0].back() == ',') tokens.erase(tokens.begin());
    if (tokens.size() < 4) return std::nullopt;

    int day = 0;
    int year = 0;
    if (!parse_int(tokens[0], day)) return std::nullopt;
    const int month = month_from_name(tokens[1]);
    if (month == 0 || !parse_int(tokens[2], year)) return std::nullopt;
    if (year < 100) year += year < 50 ? 2000 : 1900;
    if (day < 1 || day > days_in_month(year, month)) return std::nullopt;

    int hh = 0;
    int mi = 0;
    int ss = 0;
    const auto time = tokens[3];
    const auto c1 = time.find(':');
    if (c1 == std::string_view::npos) return std::nullopt;
    const auto c2 = time.find(':', c1 + 1);
    if (!parse_int(time.substr(0, c1), hh)) return std::nullopt;
    if (c2 == std::string_view::npos) {
        if (!parse_int(time.substr(c1 + 1), mi)) return std::nullopt;
    } else if (!parse_int(time.substr(c1 + 1, c2 - c1 - 1), mi) || !parse_int(time.substr(c2 + 1), ss)) {
        return std::nullopt;
    }
    if (hh > 23 || mi > 59 || ss > 60) return std::nullopt;

    int offset = 0;
    if (tokens.size() >= 5) {
        auto zone = parse_zone(tokens[4]);
        if (!zone) return std::nullopt;
        offset = *zone;
    }
    const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    return days * 1440 + hh * 60 + mi - offset;
}

YearMonth month_of_minutes(std::int64_t minutes) {
    std::int64_t days = minutes / 1440;
    if (minutes % 1440 < 0) --days;
    auto [y, m] = year_month_from_days(days);
    return YearMonth(static_cast<int>(y), static_cast<int>(m));
}

void for_each_line(const std::filesystem::path& path, const std::function<void(std::string_view)>& fn) {
    if (is_gzip_file(path)) {
        gzFile gz = gzopen(path.c_str(), "rb");
        if (gz == nullptr) throw std::runtime_error("cannot open " + path.string());
        std::unique_ptr<gzFile_s, int (*)(gzFile)> guard(gz, gzclose);
        std::string pending;
        std::array<char, 1 << 16> buf{};
        for (;;) {
            const int n = gzread(gz, buf.data(), static_cast<unsigned>(buf.size()));
            if (n < 0) {
                int errnum = 0;
                throw std::runtime_error("gzip read error in " + path.string() + ": " + gzerror(gz, &errnum));
            }
            if (n == 0) break;
            pending.append(buf.data(), static_cast<std::size_t>(n));
            std::size_t start = 0;
            for (std::size_t nl; (nl = pending.find('\n', start)) != std::string::npos; start = nl + 1)
                fn(std::string_view(pending).substr(start, nl - start));
            pending.erase(0, start);
        }
        if (!pending.empty()) fn(pending);
        return;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    while (std::getline(in, line)) fn(line);
    if (in.bad()) throw std::runtime_error("read error in " + path.string());
}

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

}  // namespace

std::optional<YearMonth> parse_rfc2822_month(std::string_view text) {
    auto minutes = parse_rfc2822_minutes(text);
    if (!minutes) return std::nullopt;
    return month_of_minutes(*minutes);
}

std::optional<EprintRecord> parse_record(std::string_view line) {
    auto doc = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!doc.is_object()) return std::nullopt;

    const auto id = doc.find("id");
    const auto cats = doc.find("categories");
    const auto versions = doc.find("versions");
    if (id == doc.end() || cats == doc.end() || versions == doc.end()) return std::nullopt;
    if (!cats->is_string() || !versions->is_array() || versions->empty()) return std::nullopt;

    EprintRecord rec;
    if (id->is_string()) {
        rec.id = id->get<std::string>();
    } else if (id->is_number()) {
        rec.id = id->dump();
    } else {
        return std::nullopt;
    }
    if (rec.id.empty()) return std::nullopt;

    const auto& cat_text = cats->get_ref<const std::string&>();
    const auto tokens = split_ws(cat_text);
    if (tokens.empty()) return std::nullopt;
    rec.primary_category = std::string(tokens.front());

    std::optional<std::int64_t> earliest;
    for (const auto& v : *versions) {
        if (!v.is_object()) return std::nullopt;
        const auto created = v.find("created");
        if (created == v.end() || !created->is_string()) return std::nullopt;
        auto minutes = parse_rfc2822_minutes(created->get_ref<const std::string&>());
        if (!minutes) return std::nullopt;
        if (!earliest || *minutes < *earliest) earliest = minutes;
    }
    rec.first_version_month = month_of_minutes(*earliest);
    if (rec.first_version_month < kEarliestMonth) return std::nullopt;
    return rec;
}

nlohmann::json to_json(const CorpusSummary& s) {
    return nlohmann::json{
        {"n_records_read", s.n_records_read},
        {"n_records_skipped", s.n_records_skipped},
        {"n_malformed", s.n_malformed},
        {"n_out_of_range", s.n_out_of_range},
        {"n_in_dropped_categories", s.n_in_dropped_categories},
        {"categories", s.categories},
        {"dropped_categories", s.dropped_categories},
        {"snapshot_end_month", s.snapshot_end_month.to_string()},
    };
}

void SeriesBuilder::add(const EprintRecord& record) {
    ++n_read_;
    ++counts_[record.primary_category][record.first_version_month.index()];
    if (!latest_ || *latest_ < record.first_version_month) latest_ = record.first_version_month;
}

BuildResult SeriesBuilder::finish(const BuildOptions& options) const {
    if (options.min_length == 0) throw std::invalid_argument("min_length must be >= 1");
    if (!latest_) throw std::runtime_error("empty corpus");

    BuildResult result;
    auto& summary = result.summary;
    summary.n_records_read = n_read_;
    summary.n_malformed = n_malformed_;
    const YearMonth end = options.snapshot_end.value_or(*latest_);
    summary.snapshot_end_month = end;

    for (const auto& [category, months] : counts_) {
        MonthlySeries series{category, {}, {}};
        std::uint64_t kept = 0;
        std::uint64_t out_of_range = 0;
        for (const auto& [month, count] : months) {
            if (month >= end.index()) {
                out_of_range += count;
                continue;
            }
            if (kept == 0) series.start_month = YearMonth::from_index(month);
            kept += count;
        }
        summary.n_out_of_range += out_of_range;
        if (kept == 0) continue;

        series.values.assign(static_cast<std::size_t>(end - series.start_month), 0);
        for (const auto& [month, count] : months) {
            if (month >= end.index()) break;
            series.values[static_cast<std::size_t>(month - series.start_month.index())] =
                static_cast<std::int64_t>(count);
        }

        if (series.size() < options.min_length) {
            summary.dropped_categories[category] = series.size();
            summary.n_in_dropped_categories += kept;
            continue;
        }
        summary.categories[category] = series.size();
        result.series.push_back(std::move(series));
    }
    summary.n_records_skipped = summary.n_malformed + summary.n_out_of_range + summary.n_in_dropped_categories;
    return result;
}

BuildResult build_series(std::span<const EprintRecord> records, const BuildOptions& options) {
    SeriesBuilder builder;
    for (const auto& r : records) builder.add(r);
    return builder.finish(options);
}

BuildResult ingest_stream(std::istream& in, const BuildOptions& options) {
    SeriesBuilder builder;
    std::string line;
    while (std::getline(in, line)) {
        if (is_blank(line)) continue;
        if (auto rec = parse_record(line)) {
            builder.add(*rec);
        } else {
            builder.add_skipped();
        }
    }
    if (in.bad()) throw std::runtime_error("read error on input stream");
    return builder.finish(options);
}

BuildResult ingest_file(const std::filesystem::path& path, const BuildOptions& options) {
    SeriesBuilder builder;
    for_each_line(path, [&](std::string_view line) {
        if (is_blank(line)) return;
        if (auto rec = parse_record(line)) {
            builder.add(*rec);
        } else {
            builder.add_skipped();
        }
    });
    return builder.finish(options);
}

bool is_gzip_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::array<unsigned char, 2> magic{};
    in.read(reinterpret_cast<char*>(magic.data()), 2);
    return in.gcount() == 2 && magic[0] == 0x1f && magic[1] == 0x8b;
}

void write_series_csv(std::ostream& out, std::span<const MonthlySeries> series) {
    std::vector<const MonthlySeries*> sorted;
    sorted.reserve(series.size());
    for (const auto& s : series) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->category_id < b->category_id; });

    out << "category,month,count\n";
    for (const auto* s : sorted) {
        for (std::size_t t = 0; t < s->values.size(); ++t)
            out << s->category_id << ',' << (s->start_month + static_cast<int>(t)).to_string() << ','
                << s->values[t] << '\n';
    }
}

void persist_series(std::span<const MonthlySeries> series, const std::filesystem::path& path) {
    if (series.empty()) throw std::invalid_argument("persist_series: empty series collection");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_series_csv(out, series);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<MonthlySeries> read_series_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("series CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "category,month,count") throw std::runtime_error("series CSV: unexpected header '" + line + "'");

    std::vector<MonthlySeries> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fail = [&](const std::string& why) {
            return std::runtime_error("series CSV line " + std::to_string(lineno) + ": " + why);
        };
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string::npos) throw fail("expected 3 fields");
        std::string_view view(line);
        const auto category = view.substr(0, c1);
        const auto month = YearMonth::parse(view.substr(c1 + 1, c2 - c1 - 1));
        std::int64_t count = 0;
        if (category.empty()) throw fail("empty category");
        if (!month) throw fail("bad month");
        if (!parse_int(view.substr(c2 + 1), count) || count < 0) throw fail("bad count");

        if (out.empty() || out.back().category_id != category) {
            for (const auto& s : out)
                if (s.category_id == category) throw fail("category rows not contiguous");
            out.push_back(MonthlySeries{std::string(category), *month, {}});
        } else if (*month != out.back().end_month() + 1) {
            throw fail("month gap or disorder in " + std::string(category));
        }
        out.back().values.push_back(count);
    }
    if (in.bad()) throw std::runtime_error("series CSV: read error");
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.category_id < b.category_id; });
    return out;
}

std::vector<MonthlySeries> load_series(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_series_csv(in);
}

void write_summary_json(const CorpusSummary& summary, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_json(summary).dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace techcast::ingest

#include "techcast/series.hpp"

#include <charconv>
#include <cstdio>

namespace techcast {

std::optional<YearMonth> YearMonth::parse(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') return std::nullopt;
    int year = 0;
    int month = 0;
    auto [p1, e1] = std::from_chars(text.data(), text.data() + 4, year);
    auto [p2, e2] = std::from_chars(text.data() + 5, text.data() + 7, month);
    if (e1 != std::errc{} || e2 != std::errc{} || p1 != text.data() + 4 || p2 != text.data() + 7)
        return std::nullopt;
    if (month < 1 || month > 12 || year < 0) return std::nullopt;
    return YearMonth(year, month);
}

std::string YearMonth::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year(), month());
    return buf;
}

std::vector<double> to_real(const std::vector<std::int64_t>& counts) {
    return {counts.begin(), counts.end()};
}

}  // namespace techcast

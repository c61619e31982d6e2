#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace techcast {

/// Calendar month, stored as a count of months since year 0.
class YearMonth {
public:
    constexpr YearMonth() = default;
    constexpr YearMonth(int year, int month) : index_(year * 12 + (month - 1)) {}

    static constexpr YearMonth from_index(int index) {
        YearMonth ym;
        ym.index_ = index;
        return ym;
    }

    /// Parses "YYYY-MM". Returns nullopt on anything else.
    static std::optional<YearMonth> parse(std::string_view text);

    [[nodiscard]] constexpr int year() const { return index_ / 12; }
    [[nodiscard]] constexpr int month() const { return index_ % 12 + 1; }
    [[nodiscard]] constexpr int index() const { return index_; }

    [[nodiscard]] std::string to_string() const;

    constexpr YearMonth operator+(int months) const { return from_index(index_ + months); }
    constexpr int operator-(YearMonth other) const { return index_ - other.index_; }
    constexpr auto operator<=>(const YearMonth&) const = default;

private:
    int index_ = 0;
};

/// Zero-filled monthly upload counts for one subcategory. values[t] belongs to
/// start_month + t.
struct MonthlySeries {
    std::string category_id;
    YearMonth start_month;
    std::vector<std::int64_t> values;

    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] YearMonth end_month() const {
        return start_month + (static_cast<int>(values.size()) - 1);
    }

    bool operator==(const MonthlySeries&) const = default;
};

std::vector<double> to_real(const std::vector<std::int64_t>& counts);

}  // namespace techcast

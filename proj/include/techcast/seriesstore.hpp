#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "techcast/series.hpp"

namespace techcast::store {

inline constexpr std::size_t kHorizon = 36;
inline constexpr std::size_t kContextLen = 36;
inline constexpr std::size_t kSampleLen = kContextLen + kHorizon;
inline constexpr std::size_t kMinSeriesLength = 108;

enum class WindowKind { Emerging, Established };

std::string_view to_string(WindowKind kind);
WindowKind window_kind_from_string(std::string_view text);

/// History prefix of a series plus the 36 months that follow it.
struct ForecastWindow {
    std::string category_id;
    WindowKind kind = WindowKind::Emerging;
    std::vector<std::int64_t> history;
    std::vector<std::int64_t> actuals;

    /// FNV-1a over category, kind and both value sequences.
    [[nodiscard]] std::uint64_t fingerprint() const;
};

struct WindowPair {
    ForecastWindow emerging;
    ForecastWindow established;
};

/// Emerging history is floor(n/3) months, established floor(2n/3). Throws
/// std::invalid_argument for series shorter than 108 months.
WindowPair make_windows(const MonthlySeries& series);

/// Both windows of every series, in series order (emerging first).
std::vector<ForecastWindow> make_all_windows(std::span<const MonthlySeries> series);

struct SplitAssignment {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
    std::uint64_t seed = 0;

    bool operator==(const SplitAssignment&) const = default;
};

/// Random partition by category. Validation and test sizes are
/// round-half-up(fraction * N). Throws std::invalid_argument for fewer than
/// 10 categories, duplicate names, or fractions outside (0, 0.5).
SplitAssignment split_categories(std::vector<std::string> categories, std::uint64_t seed,
                                 double validation_fraction = 0.10, double test_fraction = 0.10);

nlohmann::json to_json(const SplitAssignment& split);
SplitAssignment split_from_json(const nlohmann::json& doc);
void write_split_json(const SplitAssignment& split, const std::filesystem::path& path);

struct TrainSample {
    std::string category_id;
    std::vector<std::int64_t> raw_values;
    std::vector<double> scaled_values;
    double scale = 1.0;
    std::size_t split_index = kContextLen;
};

/// 1 + mean of the conditioning values.
double scale_factor(std::span<const double> conditioning);
double scale_factor(std::span<const std::int64_t> conditioning);

std::vector<double> scale(std::span<const double> values, double scale);
std::vector<double> unscale(std::span<const double> values, double scale);

/// Sliding windows of length window_len at the given stride; each is scaled by
/// the mean of its first context_len values. Series shorter than window_len
/// contribute nothing.
std::vector<TrainSample> augment(const MonthlySeries& series, std::size_t window_len = kSampleLen,
                                 std::size_t stride = 1, std::size_t context_len = kContextLen);

}  // namespace techcast::store

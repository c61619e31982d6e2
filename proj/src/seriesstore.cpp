#include "techcast/seriesstore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "techcast/rng.hpp"

namespace techcast::store {
namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
}

ForecastWindow slice(const MonthlySeries& series, WindowKind kind, std::size_t history_len) {
    ForecastWindow w;
    w.category_id = series.category_id;
    w.kind = kind;
    const auto begin = series.values.begin();
    const auto split = begin + static_cast<std::ptrdiff_t>(history_len);
    w.history.assign(begin, split);
    w.actuals.assign(split, split + static_cast<std::ptrdiff_t>(kHorizon));
    return w;
}

std::size_t round_half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9)); }

}  // namespace

std::string_view to_string(WindowKind kind) {
    return kind == WindowKind::Emerging ? "emerging" : "established";
}

WindowKind window_kind_from_string(std::string_view text) {
    if (text == "emerging") return WindowKind::Emerging;
    if (text == "established") return WindowKind::Established;
    throw std::invalid_argument("unknown window kind '" + std::string(text) + "'");
}

std::uint64_t ForecastWindow::fingerprint() const {
    std::uint64_t h = kFnvOffset;
    fnv_bytes(h, category_id.data(), category_id.size());
    const auto k = static_cast<unsigned char>(kind);
    fnv_bytes(h, &k, 1);
    const auto nh = static_cast<std::uint64_t>(history.size());
    fnv_bytes(h, &nh, sizeof nh);
    fnv_bytes(h, history.data(), history.size() * sizeof(std::int64_t));
    fnv_bytes(h, actuals.data(), actuals.size() * sizeof(std::int64_t));
    return h;
}

WindowPair make_windows(const MonthlySeries& series) {
    const std::size_t n = series.size();
    if (n < kMinSeriesLength)
        throw std::invalid_argument("series " + series.category_id + " too short for windows (" +
                                    std::to_string(n) + " < " + std::to_string(kMinSeriesLength) + ")");
    return {slice(series, WindowKind::Emerging, n / 3), slice(series, WindowKind::Established, 2 * n / 3)};
}

std::vector<ForecastWindow> make_all_windows(std::span<const MonthlySeries> series) {
    std::vector<ForecastWindow> out;
    out.reserve(series.size() * 2);
    for (const auto& s : series) {
        auto pair = make_windows(s);
        out.push_back(std::move(pair.emerging));
        out.push_back(std::move(pair.established));
    }
    return out;
}

SplitAssignment split_categories(std::vector<std::string> categories, std::uint64_t seed,
                                 double validation_fraction, double test_fraction) {
    if (categories.size() < 10)
        throw std::invalid_argument("split_categories: need at least 10 categories, got " +
                                    std::to_string(categories.size()));
    for (double f : {validation_fraction, test_fraction})
        if (!(f > 0.0 && f < 0.5)) throw std::invalid_argument("split fraction must lie in (0, 0.5)");

    std::sort(categories.begin(), categories.end());
    if (std::adjacent_find(categories.begin(), categories.end()) != categories.end())
        throw std::invalid_argument("split_categories: duplicate category");

    const auto n = static_cast<double>(categories.size());
    const std::size_t n_val = round_half_up(validation_fraction * n);
    const std::size_t n_test = round_half_up(test_fraction * n);
    if (n_val + n_test >= categories.size()) throw std::invalid_argument("split leaves no training categories");

    Rng rng(seed);
    shuffle(std::span<std::string>(categories), rng);

    SplitAssignment split;
    split.seed = seed;
    const auto b = categories.begin();
    split.validation.assign(b, b + static_cast<std::ptrdiff_t>(n_val));
    split.test.assign(b + static_cast<std::ptrdiff_t>(n_val), b + static_cast<std::ptrdiff_t>(n_val + n_test));
    split.train.assign(b + static_cast<std::ptrdiff_t>(n_val + n_test), categories.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

nlohmann::json to_json(const SplitAssignment& split) {
    return {{"train", split.train}, {"validation", split.validation}, {"test", split.test}, {"seed", split.seed}};
}

SplitAssignment split_from_json(const nlohmann::json& doc) {
    SplitAssignment split;
    split.train = doc.at("train").get<std::vector<std::string>>();
    split.validation = doc.at("validation").get<std::vector<std::string>>();
    split.test = doc.at("test").get<std::vector<std::string>>();
    split.seed = doc.at("seed").get<std::uint64_t>();
    return split;
}

void write_split_json(const SplitAssignment& split, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_json(split).dump(2) << '\n';
}

double scale_factor(std::span<const double> conditioning) {
    if (conditioning.empty()) return 1.0;
    const double sum = std::accumulate(conditioning.begin(), conditioning.end(), 0.0);
    return 1.0 + sum / static_cast<double>(conditioning.size());
}

double scale_factor(std::span<const std::int64_t> conditioning) {
    if (conditioning.empty()) return 1.0;
    const auto sum = std::accumulate(conditioning.begin(), conditioning.end(), std::int64_t{0});
    return 1.0 + static_cast<double>(sum) / static_cast<double>(conditioning.size());
}

std::vector<double> scale(std::span<const double> values, double scale) {
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [scale](double v) { return v / scale; });
    return out;
}

std::vector<double> unscale(std::span<const double> values, double scale) {
    if (!(scale >= 1.0)) throw std::invalid_argument("unscale: scale must be >= 1");
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [scale](double v) { return v * scale; });
    return out;
}

std::vector<TrainSample> augment(const MonthlySeries& series, std::size_t window_len, std::size_t stride,
                                 std::size_t context_len) {
    if (stride == 0) throw std::invalid_argument("augment: stride must be >= 1");
    if (context_len == 0 || context_len >= window_len)
        throw std::invalid_argument("augment: context_len must lie in [1, window_len)");
    std::vector<TrainSample> out;
    if (series.size() < window_len) return out;

    for (std::size_t start = 0; start + window_len <= series.size(); start += stride) {
        TrainSample s;
        s.category_id = series.category_id;
        const auto b = series.values.begin() + static_cast<std::ptrdiff_t>(start);
        s.raw_values.assign(b, b + static_cast<std::ptrdiff_t>(window_len));
        s.split_index = context_len;
        s.scale = scale_factor(std::span<const std::int64_t>(s.raw_values).first(context_len));
        s.scaled_values.resize(window_len);
        for (std::size_t t = 0; t < window_len; ++t)
            s.scaled_values[t] = static_cast<double>(s.raw_values[t]) / s.scale;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace techcast::store

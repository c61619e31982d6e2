#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "techcast/config.hpp"
#include "techcast/deepforecast.hpp"
#include "techcast/evalharness.hpp"
#include "techcast/ingest.hpp"
#include "techcast/seriesstore.hpp"

namespace techcast::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct IngestArgs {
    std::filesystem::path input;
    std::filesystem::path output;
    std::optional<std::filesystem::path> summary;  // defaults to <output>.summary.json
    std::size_t min_length = ingest::kDefaultMinLength;
    std::optional<YearMonth> snapshot_end;
};

int cmd_ingest(const IngestArgs& args, std::ostream& out, std::ostream& err);

struct RunOutcome {
    int exit_code = kExitOk;
    std::vector<std::string> warnings;
    std::vector<store::ForecastWindow> windows;
    std::optional<store::SplitAssignment> split;
    std::optional<deep::Selection> selection;
    eval::BenchmarkResult benchmark;
};

/// Applies TECHCAST_SEED when set to a non-negative integer.
ExperimentConfig apply_environment(ExperimentConfig config);

/// Full pipeline: series, windows, split, FIT/ARIMA on all windows, RNN
/// selection on train/validation and evaluation on test windows, then every
/// output file under config.output_dir.
RunOutcome run_experiment(const ExperimentConfig& config, std::ostream& log);

enum class ReportFormat { Text, Csv };

int cmd_report(const std::filesystem::path& rows_path, ReportFormat format, int precision, std::ostream& out,
               std::ostream& err);

struct GradcheckArgs {
    deep::CellType cell = deep::CellType::LSTM;
    std::size_t hidden_size = 8;
    std::uint64_t seed = 1;
    double epsilon = 1e-5;
    std::size_t count = 50;
    double tolerance = 1e-4;
};

int cmd_gradcheck(const GradcheckArgs& args, std::ostream& out);

}  // namespace techcast::cli

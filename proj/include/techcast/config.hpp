#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "techcast/deepforecast.hpp"
#include "techcast/evalharness.hpp"

namespace techcast::cli {

/// Everything a benchmark run depends on. Defaults reproduce the published
/// protocol where it states a value.
struct ExperimentConfig {
    std::string corpus_path;
    std::string series_path;
    std::string output_dir = "techcast_out";
    std::size_t min_length = 108;
    std::uint64_t seed = 42;
    double validation_fraction = 0.10;
    double test_fraction = 0.10;
    std::vector<eval::Method> methods{eval::Method::FIT, eval::Method::ARIMA, eval::Method::RNN};
    bool write_plots = true;

    int scurve_max_iterations = 200;
    double scurve_initial_lambda = 1e-3;
    double scurve_relative_tolerance = 1e-10;

    int arima_restarts = 3;

    std::vector<deep::CellType> rnn_cells{deep::CellType::VanillaRNN, deep::CellType::LSTM};
    std::vector<std::size_t> rnn_hidden_sizes{16, 32, 64};
    std::size_t rnn_epochs = 750;
    std::size_t rnn_batch_size = 64;
    double rnn_learning_rate = 0.001;
    std::size_t rnn_mc_samples = 100;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;

    [[nodiscard]] deep::ModelConfig base_model_config() const;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses the key = value experiment format (a TOML subset: dotted keys,
/// quoted strings, numbers, booleans and flat arrays; '#' comments). Unknown
/// keys are errors. Values absent from the text keep their defaults.
ExperimentConfig parse_config(std::string_view text);
/// Relative corpus and series paths resolve against the config's directory.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every field with its resolved value; parse_config(to_text(c)) == c.
std::string to_text(const ExperimentConfig& config);

}  // namespace techcast::cli

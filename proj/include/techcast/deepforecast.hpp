#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "techcast/seriesstore.hpp"

/// Autoregressive recurrent forecaster: one network is trained on mean-scaled
/// windows of every training category and forecasts by ancestral sampling of
/// a per-step Gaussian.
namespace techcast::deep {

enum class CellType { VanillaRNN, LSTM };

std::string_view to_string(CellType cell);
CellType cell_type_from_string(std::string_view text);

struct ModelConfig {
    CellType cell = CellType::LSTM;
    std::size_t hidden_size = 32;
    std::size_t context_len = store::kContextLen;
    std::size_t horizon = store::kHorizon;
    std::size_t batch_size = 64;
    double learning_rate = 0.001;
    std::size_t epochs = 750;
    std::uint64_t seed = 0;
    std::size_t mc_samples = 100;

    /// Throws std::invalid_argument on zero sizes or a non-positive rate.
    void validate() const;
};

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& doc);

inline constexpr double kSigmaFloor = 1e-6;

/// Network parameters. Gate blocks of the LSTM matrices are stacked in the
/// order input, forget, candidate, output.
struct Weights {
    CellType cell = CellType::LSTM;
    std::size_t hidden_size = 0;
    Eigen::MatrixXd input;      // G x 1, G = H (vanilla) or 4H (LSTM)
    Eigen::MatrixXd recurrent;  // G x H
    Eigen::MatrixXd bias;       // G x 1
    Eigen::MatrixXd mu_w;       // 1 x H
    Eigen::MatrixXd mu_b;       // 1 x 1
    Eigen::MatrixXd sigma_w;    // 1 x H
    Eigen::MatrixXd sigma_b;    // 1 x 1

    /// Uniform(-1/sqrt(H), 1/sqrt(H)) with LSTM forget bias +1.
    static Weights init(CellType cell, std::size_t hidden_size, std::uint64_t seed);
    static Weights zeros(CellType cell, std::size_t hidden_size);

    [[nodiscard]] std::size_t parameter_count() const;
    [[nodiscard]] std::vector<double> flatten() const;
    void assign(std::span<const double> flat);
    [[nodiscard]] bool all_finite() const;

    std::vector<Eigen::MatrixXd*> blocks();
    [[nodiscard]] std::vector<const Eigen::MatrixXd*> blocks() const;

    bool operator==(const Weights& other) const;
};

/// Recurrent state for a batch of B independent sequences (one per column).
struct NetState {
    Eigen::MatrixXd hidden;  // H x B
    Eigen::MatrixXd memory;  // H x B, LSTM only

    static NetState zeros(const Weights& w, Eigen::Index batch = 1);
};

struct StepDistribution {
    double mu = 0.0;
    double sigma = 1.0;
};

class NonFiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BatchStep {
    Eigen::RowVectorXd mu;
    Eigen::RowVectorXd sigma;
};

/// One cell update then the affine heads, for a row of B inputs.
BatchStep step_batch(const Eigen::RowVectorXd& prev_values, NetState& state, const Weights& w);

/// Scalar form of step_batch. Throws NonFiniteError on non-finite input,
/// state or weights.
std::pair<StepDistribution, NetState> step(double prev_value, const NetState& state, const Weights& w);

/// 0.5 ln(2 pi) + ln(sigma) + (observed - mu)^2 / (2 sigma^2).
double nll(const StepDistribution& dist, double observed);

/// Mean prediction-range NLL of one scaled sample, teacher-forced: the input
/// at step t is the value at t-1 (zero at t = 0).
double sample_loss(const Weights& w, std::span<const double> scaled, std::size_t context_len);

/// Same loss computed on the tape, with its gradient in flatten() order.
double sample_loss_and_gradient(const Weights& w, std::span<const double> scaled, std::size_t context_len,
                                std::vector<double>& gradient);

struct GradientCheck {
    double max_relative_error = 0.0;
    std::size_t checked = 0;
    std::vector<std::size_t> indices;
    std::vector<double> analytic;
    std::vector<double> numeric;
};

/// Compares tape gradients with central differences on `count` randomly
/// chosen parameters (all of them when fewer exist). Relative error is
/// |a - n| / max(|a| + |n|, 1e-8).
GradientCheck gradient_check(const Weights& w, std::span<const double> scaled, std::size_t context_len,
                             double epsilon = 1e-5, std::size_t count = 50, std::uint64_t seed = 0);

class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(std::size_t epoch, const std::string& what) : std::runtime_error(what), epoch_(epoch) {}
    [[nodiscard]] std::size_t epoch() const { return epoch_; }

private:
    std::size_t epoch_;
};

struct TrainResult {
    Weights weights;
    std::vector<double> epoch_losses;  // one per epoch, sample-weighted batch mean
};

/// Minibatch Adam (beta 0.9/0.999) on the mean prediction-range NLL. Batches
/// are reshuffled every epoch from config.seed. Throws std::invalid_argument
/// on empty or mis-sized samples and TrainingDiverged on a non-finite loss.
TrainResult train(std::span<const store::TrainSample> samples, const ModelConfig& config);
TrainResult train(std::span<const store::TrainSample> samples, const ModelConfig& config, Weights initial);

struct ForecastPaths {
    Eigen::MatrixXd paths;     // mc_samples x horizon, unscaled and clamped at 0
    std::vector<double> point;  // per-step mean across paths
    double scale = 1.0;
};

/// Forecast from an already scaled conditioning range; paths are multiplied
/// by `scale` before clamping.
ForecastPaths forecast_scaled(std::span<const double> scaled_conditioning, double scale, const Weights& w,
                              std::size_t horizon, std::size_t mc_samples, std::uint64_t seed);

/// Uses the last context_len values of `history`. Throws std::invalid_argument
/// when the history is shorter.
ForecastPaths forecast(std::span<const double> history, const Weights& w, const ModelConfig& config,
                       std::uint64_t seed);

/// Deterministic mean unroll (each step feeds back mu), unscaled, unclamped.
std::vector<double> forecast_mean_unroll(std::span<const double> history, const Weights& w,
                                         const ModelConfig& config);

nlohmann::json to_json(const Weights& w, const ModelConfig& config);
std::pair<Weights, ModelConfig> weights_from_json(const nlohmann::json& doc);
void save_weights(const Weights& w, const ModelConfig& config, const std::filesystem::path& path);
std::pair<Weights, ModelConfig> load_weights(const std::filesystem::path& path);
void write_loss_curve(std::span<const double> losses, const std::filesystem::path& path);

/// Point forecast for one evaluation window, seeded from the base seed and the
/// window fingerprint.
std::vector<double> forecast_window(const store::ForecastWindow& window, const Weights& w,
                                    const ModelConfig& config);

struct CandidateScore {
    ModelConfig config;
    std::optional<double> validation_mape;  // nullopt if training failed or no window had a defined MAPE
    std::string error;
};

struct Selection {
    std::size_t best = 0;
    ModelConfig config;
    Weights weights;
    std::vector<double> epoch_losses;
    std::vector<CandidateScore> candidates;
};

/// Every cell type x hidden size, each trained from `base`. Lowest mean
/// validation MAPE wins; ties go to the smaller hidden size, then VanillaRNN.
std::vector<ModelConfig> config_grid(const ModelConfig& base, std::span<const CellType> cells,
                                     std::span<const std::size_t> hidden_sizes);

/// Selection order: scored before unscored, then by the tie rule above.
bool ranks_before(const CandidateScore& a, const CandidateScore& b);

/// Throws std::invalid_argument without validation windows and
/// std::runtime_error when every candidate fails.
Selection select_model(std::span<const ModelConfig> configs, std::span<const store::TrainSample> train_samples,
                       std::span<const store::ForecastWindow> validation_windows);

}  // namespace techcast::deep

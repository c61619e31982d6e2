#include "techcast/deepforecast.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <tuple>

#include "techcast/autodiff.hpp"
#include "techcast/metrics.hpp"
#include "techcast/rng.hpp"

namespace techcast::deep {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

std::size_t gate_rows(CellType cell, std::size_t hidden) { return cell == CellType::LSTM ? 4 * hidden : hidden; }

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct TapeWeights {
    ad::Var input, recurrent, bias, mu_w, mu_b, sigma_w, sigma_b;

    std::array<ad::Var, 7> all() const { return {input, recurrent, bias, mu_w, mu_b, sigma_w, sigma_b}; }
};

TapeWeights put_on_tape(ad::Tape& tape, const Weights& w) {
    return {tape.leaf(w.input),   tape.leaf(w.recurrent), tape.leaf(w.bias),   tape.leaf(w.mu_w),
            tape.leaf(w.mu_b),    tape.leaf(w.sigma_w),   tape.leaf(w.sigma_b)};
}

// Mean NLL over the prediction range of a T x B block of scaled samples
// (one sample per column).
ad::Var loss_on_tape(ad::Tape& tape, const TapeWeights& p, const Weights& w, const MatrixXd& values,
                     std::size_t context_len) {
    const auto T = static_cast<Index>(values.rows());
    const Index B = values.cols();
    const auto H = static_cast<Index>(w.hidden_size);
    const auto context = static_cast<Index>(context_len);

    ad::Var h = tape.leaf(MatrixXd::Zero(H, B));
    ad::Var c = tape.leaf(MatrixXd::Zero(H, B));
    std::optional<ad::Var> total;
    for (Index t = 0; t < T; ++t) {
        const ad::Var x = tape.leaf(t == 0 ? MatrixXd(MatrixXd::Zero(1, B)) : MatrixXd(values.row(t - 1)));
        const ad::Var z = tape.add_bias(tape.add(tape.matmul(p.input, x), tape.matmul(p.recurrent, h)), p.bias);
        if (w.cell == CellType::VanillaRNN) {
            h = tape.tanh(z);
        } else {
            const ad::Var i = tape.sigmoid(tape.rows(z, 0, H));
            const ad::Var f = tape.sigmoid(tape.rows(z, H, H));
            const ad::Var g = tape.tanh(tape.rows(z, 2 * H, H));
            const ad::Var o = tape.sigmoid(tape.rows(z, 3 * H, H));
            c = tape.add(tape.mul(f, c), tape.mul(i, g));
            h = tape.mul(o, tape.tanh(c));
        }
        if (t < context) continue;
        const ad::Var mu = tape.add_bias(tape.matmul(p.mu_w, h), p.mu_b);
        const ad::Var sigma =
            tape.add_constant(tape.softplus(tape.add_bias(tape.matmul(p.sigma_w, h), p.sigma_b)), kSigmaFloor);
        const ad::Var step_nll = tape.gaussian_nll_sum(mu, sigma, MatrixXd(values.row(t)));
        total = total ? tape.add(*total, step_nll) : step_nll;
    }
    if (!total) throw std::invalid_argument("sample shorter than the conditioning range");
    return tape.scale(*total, 1.0 / static_cast<double>(B * (T - context)));
}

MatrixXd as_column(std::span<const double> v) {
    MatrixXd m(static_cast<Index>(v.size()), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Index>(i), 0) = v[i];
    return m;
}

void check_finite_state(const NetState& s) {
    if (!s.hidden.allFinite() || (s.memory.size() > 0 && !s.memory.allFinite()))
        throw NonFiniteError("non-finite recurrent state");
}

struct Adam {
    std::vector<MatrixXd> m;
    std::vector<MatrixXd> v;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t t = 0;

    explicit Adam(const Weights& w) {
        for (const auto* b : w.blocks()) {
            m.push_back(MatrixXd::Zero(b->rows(), b->cols()));
            v.push_back(MatrixXd::Zero(b->rows(), b->cols()));
        }
    }

    void update(Weights& w, const std::vector<const MatrixXd*>& grads, double lr) {
        ++t;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        auto blocks = w.blocks();
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            const MatrixXd& g = *grads[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g.cwiseProduct(g);
            blocks[i]->array() -= lr * (m[i].array() / c1) / ((v[i].array() / c2).sqrt() + eps);
        }
    }
};

}  // namespace

std::string_view to_string(CellType cell) { return cell == CellType::LSTM ? "lstm" : "rnn"; }

CellType cell_type_from_string(std::string_view text) {
    if (text == "lstm" || text == "LSTM") return CellType::LSTM;
    if (text == "rnn" || text == "RNN" || text == "vanilla") return CellType::VanillaRNN;
    throw std::invalid_argument("unknown cell type '" + std::string(text) + "'");
}

void ModelConfig::validate() const {
    if (hidden_size == 0) throw std::invalid_argument("hidden_size must be positive");
    if (context_len == 0 || horizon == 0) throw std::invalid_argument("context_len and horizon must be positive");
    if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    if (mc_samples == 0) throw std::invalid_argument("mc_samples must be positive");
}

nlohmann::json to_json(const ModelConfig& c) {
    return {{"cell", to_string(c.cell)},       {"hidden_size", c.hidden_size}, {"context_len", c.context_len},
            {"horizon", c.horizon},            {"batch_size", c.batch_size},   {"learning_rate", c.learning_rate},
            {"epochs", c.epochs},              {"seed", c.seed},               {"mc_samples", c.mc_samples}};
}

ModelConfig model_config_from_json(const nlohmann::json& doc) {
    ModelConfig c;
    c.cell = cell_type_from_string(doc.at("cell").get<std::string>());
    c.hidden_size = doc.at("hidden_size").get<std::size_t>();
    c.context_len = doc.at("context_len").get<std::size_t>();
    c.horizon = doc.at("horizon").get<std::size_t>();
    c.batch_size = doc.at("batch_size").get<std::size_t>();
    c.learning_rate = doc.at("learning_rate").get<double>();
    c.epochs = doc.at("epochs").get<std::size_t>();
    c.seed = doc.at("seed").get<std::uint64_t>();
    c.mc_samples = doc.at("mc_samples").get<std::size_t>();
    c.validate();
    return c;
}

Weights Weights::zeros(CellType cell, std::size_t hidden_size) {
    if (hidden_size == 0) throw std::invalid_argument("hidden_size must be positive");
    const auto G = static_cast<Index>(gate_rows(cell, hidden_size));
    const auto H = static_cast<Index>(hidden_size);
    Weights w;
    w.cell = cell;
    w.hidden_size = hidden_size;
    w.input = MatrixXd::Zero(G, 1);
    w.recurrent = MatrixXd::Zero(G, H);
    w.bias = MatrixXd::Zero(G, 1);
    w.mu_w = MatrixXd::Zero(1, H);
    w.mu_b = MatrixXd::Zero(1, 1);
    w.sigma_w = MatrixXd::Zero(1, H);
    w.sigma_b = MatrixXd::Zero(1, 1);
    return w;
}

Weights Weights::init(CellType cell, std::size_t hidden_size, std::uint64_t seed) {
    Weights w = zeros(cell, hidden_size);
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto* b : w.blocks())
        for (Index j = 0; j < b->cols(); ++j)
            for (Index i = 0; i < b->rows(); ++i) (*b)(i, j) = u(rng);
    if (cell == CellType::LSTM) {
        const auto H = static_cast<Index>(hidden_size);
        w.bias.middleRows(H, H).array() += 1.0;
    }
    return w;
}

std::vector<MatrixXd*> Weights::blocks() { return {&input, &recurrent, &bias, &mu_w, &mu_b, &sigma_w, &sigma_b}; }

std::vector<const MatrixXd*> Weights::blocks() const {
    return {&input, &recurrent, &bias, &mu_w, &mu_b, &sigma_w, &sigma_b};
}

std::size_t Weights::parameter_count() const {
    std::size_t n = 0;
    for (const auto* b : blocks()) n += static_cast<std::size_t>(b->size());
    return n;
}

std::vector<double> Weights::flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto* b : blocks()) flat.insert(flat.end(), b->data(), b->data() + b->size());
    return flat;
}

void Weights::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw std::invalid_argument("Weights::assign: size mismatch");
    std::size_t off = 0;
    for (auto* b : blocks()) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), b->size(), b->data());
        off += static_cast<std::size_t>(b->size());
    }
}

bool Weights::all_finite() const {
    const auto bs = blocks();
    return std::all_of(bs.begin(), bs.end(), [](const MatrixXd* b) { return b->allFinite(); });
}

bool Weights::operator==(const Weights& o) const {
    if (cell != o.cell || hidden_size != o.hidden_size) return false;
    const auto a = blocks();
    const auto b = o.blocks();
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i]->rows() != b[i]->rows() || a[i]->cols() != b[i]->cols() || *a[i] != *b[i]) return false;
    return true;
}

NetState NetState::zeros(const Weights& w, Index batch) {
    const auto H = static_cast<Index>(w.hidden_size);
    NetState s;
    s.hidden = MatrixXd::Zero(H, batch);
    if (w.cell == CellType::LSTM) s.memory = MatrixXd::Zero(H, batch);
    return s;
}

BatchStep step_batch(const RowVectorXd& prev, NetState& state, const Weights& w) {
    const auto H = static_cast<Index>(w.hidden_size);
    MatrixXd z = w.input * prev;
    z.noalias() += w.recurrent * state.hidden;
    z.colwise() += w.bias.col(0);
    if (w.cell == CellType::VanillaRNN) {
        state.hidden = z.array().tanh();
    } else {
        const MatrixXd i = z.middleRows(0, H).unaryExpr([](double v) { return sigmoid(v); });
        const MatrixXd f = z.middleRows(H, H).unaryExpr([](double v) { return sigmoid(v); });
        const MatrixXd g = z.middleRows(2 * H, H).array().tanh();
        const MatrixXd o = z.middleRows(3 * H, H).unaryExpr([](double v) { return sigmoid(v); });
        state.memory = f.cwiseProduct(state.memory) + i.cwiseProduct(g);
        state.hidden = o.cwiseProduct(MatrixXd(state.memory.array().tanh()));
    }
    BatchStep out;
    out.mu = (w.mu_w * state.hidden).array() + w.mu_b(0, 0);
    const RowVectorXd pre = (w.sigma_w * state.hidden).array() + w.sigma_b(0, 0);
    out.sigma = pre.unaryExpr([](double v) { return softplus(v) + kSigmaFloor; });
    return out;
}

std::pair<StepDistribution, NetState> step(double prev_value, const NetState& state, const Weights& w) {
    if (!std::isfinite(prev_value)) throw NonFiniteError("non-finite input value");
    if (!w.all_finite()) throw NonFiniteError("non-finite weights");
    check_finite_state(state);
    NetState next = state;
    RowVectorXd x(1);
    x(0) = prev_value;
    const auto out = step_batch(x, next, w);
    check_finite_state(next);
    return {StepDistribution{out.mu(0), out.sigma(0)}, std::move(next)};
}

double nll(const StepDistribution& d, double observed) {
    const double z = (observed - d.mu) / d.sigma;
    return 0.5 * std::log(2.0 * std::numbers::pi) + std::log(d.sigma) + 0.5 * z * z;
}

double sample_loss(const Weights& w, std::span<const double> scaled, std::size_t context_len) {
    if (scaled.size() <= context_len) throw std::invalid_argument("sample shorter than the conditioning range");
    NetState state = NetState::zeros(w);
    double total = 0.0;
    double prev = 0.0;
    for (std::size_t t = 0; t < scaled.size(); ++t) {
        RowVectorXd x(1);
        x(0) = prev;
        const auto out = step_batch(x, state, w);
        if (t >= context_len) total += nll({out.mu(0), out.sigma(0)}, scaled[t]);
        prev = scaled[t];
    }
    return total / static_cast<double>(scaled.size() - context_len);
}

double sample_loss_and_gradient(const Weights& w, std::span<const double> scaled, std::size_t context_len,
                                std::vector<double>& gradient) {
    ad::Tape tape;
    const auto p = put_on_tape(tape, w);
    const ad::Var loss = loss_on_tape(tape, p, w, as_column(scaled), context_len);
    tape.backward(loss);
    gradient.clear();
    gradient.reserve(w.parameter_count());
    for (const auto v : p.all()) {
        const MatrixXd& g = tape.grad(v);
        gradient.insert(gradient.end(), g.data(), g.data() + g.size());
    }
    return tape.value(loss)(0, 0);
}

GradientCheck gradient_check(const Weights& w, std::span<const double> scaled, std::size_t context_len,
                             double epsilon, std::size_t count, std::uint64_t seed) {
    std::vector<double> analytic;
    sample_loss_and_gradient(w, scaled, context_len, analytic);

    const std::size_t n = w.parameter_count();
    std::vector<std::size_t> indices(n);
    std::iota(indices.begin(), indices.end(), 0);
    if (count < n) {
        Rng rng(seed);
        shuffle(std::span<std::size_t>(indices), rng);
        indices.resize(count);
        std::sort(indices.begin(), indices.end());
    }

    GradientCheck out;
    const std::vector<double> base = w.flatten();
    Weights probe = w;
    for (const std::size_t idx : indices) {
        auto flat = base;
        flat[idx] = base[idx] + epsilon;
        probe.assign(flat);
        const double up = sample_loss(probe, scaled, context_len);
        flat[idx] = base[idx] - epsilon;
        probe.assign(flat);
        const double down = sample_loss(probe, scaled, context_len);
        const double numeric = (up - down) / (2.0 * epsilon);
        const double a = analytic[idx];
        const double rel = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), 1e-8);
        out.max_relative_error = std::max(out.max_relative_error, rel);
        out.indices.push_back(idx);
        out.analytic.push_back(a);
        out.numeric.push_back(numeric);
    }
    out.checked = indices.size();
    return out;
}

TrainResult train(std::span<const store::TrainSample> samples, const ModelConfig& config) {
    return train(samples, config, Weights::init(config.cell, config.hidden_size, config.seed));
}

TrainResult train(std::span<const store::TrainSample> samples, const ModelConfig& config, Weights initial) {
    config.validate();
    if (samples.empty()) throw std::invalid_argument("train: empty sample set");
    const std::size_t len = config.context_len + config.horizon;
    for (const auto& s : samples)
        if (s.scaled_values.size() != len)
            throw std::invalid_argument("train: sample of length " + std::to_string(s.scaled_values.size()) +
                                        ", expected " + std::to_string(len));
    if (initial.cell != config.cell || initial.hidden_size != config.hidden_size)
        throw std::invalid_argument("train: initial weights do not match config");

    TrainResult result{std::move(initial), {}};
    Weights& w = result.weights;
    Adam adam(w);
    Rng rng(splitmix(config.seed ^ 0x5eedULL));
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(std::span<std::size_t>(order), rng);
        double epoch_total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(start + config.batch_size, order.size());
            MatrixXd block(static_cast<Index>(len), static_cast<Index>(stop - start));
            for (std::size_t j = start; j < stop; ++j) {
                const auto& v = samples[order[j]].scaled_values;
                for (std::size_t t = 0; t < len; ++t)
                    block(static_cast<Index>(t), static_cast<Index>(j - start)) = v[t];
            }
            ad::Tape tape;
            const auto p = put_on_tape(tape, w);
            const ad::Var loss = loss_on_tape(tape, p, w, block, config.context_len);
            const double value = tape.value(loss)(0, 0);
            if (!std::isfinite(value))
                throw TrainingDiverged(epoch + 1, "non-finite training loss at epoch " + std::to_string(epoch + 1));
            tape.backward(loss);
            std::vector<const MatrixXd*> grads;
            for (const auto v : p.all()) grads.push_back(&tape.grad(v));
            adam.update(w, grads, config.learning_rate);
            epoch_total += value * static_cast<double>(stop - start);
        }
        const double epoch_loss = epoch_total / static_cast<double>(order.size());
        if (!std::isfinite(epoch_loss) || !w.all_finite())
            throw TrainingDiverged(epoch + 1, "training diverged at epoch " + std::to_string(epoch + 1));
        result.epoch_losses.push_back(epoch_loss);
    }
    return result;
}

ForecastPaths forecast_scaled(std::span<const double> cond, double scale, const Weights& w, std::size_t horizon,
                              std::size_t mc_samples, std::uint64_t seed) {
    if (cond.empty()) throw std::invalid_argument("forecast: empty conditioning range");
    if (mc_samples == 0) throw std::invalid_argument("forecast: mc_samples must be positive");
    NetState state = NetState::zeros(w);
    RowVectorXd x(1);
    for (std::size_t t = 0; t < cond.size(); ++t) {
        x(0) = t == 0 ? 0.0 : cond[t - 1];
        step_batch(x, state, w);
    }
    // state has consumed inputs 0, cond[0], ..., cond[C-2]; the next input
    // is cond[C-1] and the next output is the first forecast step.
    const auto M = static_cast<Index>(mc_samples);
    NetState paths_state;
    paths_state.hidden = state.hidden.replicate(1, M);
    if (state.memory.size() > 0) paths_state.memory = state.memory.replicate(1, M);
    check_finite_state(paths_state);

    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    ForecastPaths out;
    out.scale = scale;
    out.paths = MatrixXd::Zero(M, static_cast<Index>(horizon));
    RowVectorXd prev = RowVectorXd::Constant(M, cond.back());
    for (std::size_t h = 0; h < horizon; ++h) {
        const auto dist = step_batch(prev, paths_state, w);
        for (Index m = 0; m < M; ++m) {
            const double zval = dist.mu(m) + dist.sigma(m) * normal(rng);
            prev(m) = zval;
            out.paths(m, static_cast<Index>(h)) = std::max(0.0, zval * scale);
        }
    }
    out.point.resize(horizon);
    for (std::size_t h = 0; h < horizon; ++h) out.point[h] = out.paths.col(static_cast<Index>(h)).mean();
    return out;
}

ForecastPaths forecast(std::span<const double> history, const Weights& w, const ModelConfig& config,
                       std::uint64_t seed) {
    if (history.size() < config.context_len)
        throw std::invalid_argument("forecast: history shorter than the conditioning range");
    const auto cond = history.last(config.context_len);
    const double v = store::scale_factor(cond);
    const auto scaled = store::scale(cond, v);
    return forecast_scaled(scaled, v, w, config.horizon, config.mc_samples, seed);
}

std::vector<double> forecast_mean_unroll(std::span<const double> history, const Weights& w,
                                         const ModelConfig& config) {
    if (history.size() < config.context_len)
        throw std::invalid_argument("forecast: history shorter than the conditioning range");
    const auto cond = history.last(config.context_len);
    const double v = store::scale_factor(cond);
    const auto scaled = store::scale(cond, v);
    NetState state = NetState::zeros(w);
    RowVectorXd x(1);
    for (std::size_t t = 0; t < scaled.size(); ++t) {
        x(0) = t == 0 ? 0.0 : scaled[t - 1];
        step_batch(x, state, w);
    }
    std::vector<double> out(config.horizon);
    x(0) = scaled.back();
    for (std::size_t h = 0; h < config.horizon; ++h) {
        const auto d = step_batch(x, state, w);
        out[h] = d.mu(0) * v;
        x(0) = d.mu(0);
    }
    return out;
}

nlohmann::json to_json(const Weights& w, const ModelConfig& config) {
    static constexpr std::array<const char*, 7> kNames{"input",   "recurrent", "bias",   "mu_w",
                                                       "mu_b",    "sigma_w",   "sigma_b"};
    nlohmann::json params = nlohmann::json::object();
    const auto blocks = w.blocks();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto* b = blocks[i];
        params[kNames[i]] = {{"rows", b->rows()},
                             {"cols", b->cols()},
                             {"data", std::vector<double>(b->data(), b->data() + b->size())}};
    }
    return {{"format", "techcast-rnn-weights"}, {"version", 1}, {"config", to_json(config)}, {"params", params}};
}

std::pair<Weights, ModelConfig> weights_from_json(const nlohmann::json& doc) {
    if (doc.value("format", "") != "techcast-rnn-weights") throw std::runtime_error("not a techcast weights file");
    const ModelConfig config = model_config_from_json(doc.at("config"));
    Weights w = Weights::zeros(config.cell, config.hidden_size);
    static constexpr std::array<const char*, 7> kNames{"input",   "recurrent", "bias",   "mu_w",
                                                       "mu_b",    "sigma_w",   "sigma_b"};
    auto blocks = w.blocks();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& entry = doc.at("params").at(kNames[i]);
        const auto data = entry.at("data").get<std::vector<double>>();
        if (entry.at("rows").get<Index>() != blocks[i]->rows() || entry.at("cols").get<Index>() != blocks[i]->cols() ||
            static_cast<Index>(data.size()) != blocks[i]->size())
            throw std::runtime_error(std::string("weights file: bad shape for ") + kNames[i]);
        std::copy(data.begin(), data.end(), blocks[i]->data());
    }
    return {std::move(w), config};
}

void save_weights(const Weights& w, const ModelConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_json(w, config).dump() << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::pair<Weights, ModelConfig> load_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return weights_from_json(nlohmann::json::parse(in));
}

void write_loss_curve(std::span<const double> losses, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.precision(17);
    out << "epoch,loss\n";
    for (std::size_t i = 0; i < losses.size(); ++i) out << i + 1 << ',' << losses[i] << '\n';
}

std::vector<double> forecast_window(const store::ForecastWindow& window, const Weights& w,
                                    const ModelConfig& config) {
    const auto history = to_real(window.history);
    return forecast(history, w, config, splitmix(config.seed ^ window.fingerprint())).point;
}

std::vector<ModelConfig> config_grid(const ModelConfig& base, std::span<const CellType> cells,
                                     std::span<const std::size_t> hidden_sizes) {
    std::vector<ModelConfig> out;
    for (const auto cell : cells)
        for (const auto h : hidden_sizes) {
            ModelConfig c = base;
            c.cell = cell;
            c.hidden_size = h;
            out.push_back(c);
        }
    return out;
}

bool ranks_before(const CandidateScore& a, const CandidateScore& b) {
    if (!a.validation_mape || !b.validation_mape) return a.validation_mape.has_value() && !b.validation_mape;
    const auto key = [](const CandidateScore& c) {
        return std::make_tuple(*c.validation_mape, c.config.hidden_size, c.config.cell == CellType::LSTM ? 1 : 0);
    };
    return key(a) < key(b);
}

Selection select_model(std::span<const ModelConfig> configs, std::span<const store::TrainSample> train_samples,
                       std::span<const store::ForecastWindow> validation_windows) {
    if (validation_windows.empty()) throw std::invalid_argument("select_model: no validation windows");
    if (configs.empty()) throw std::invalid_argument("select_model: empty config grid");

    Selection sel;
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        CandidateScore cand{configs[i], std::nullopt, {}};
        try {
            auto trained = train(train_samples, configs[i]);
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& win : validation_windows) {
                const auto point = forecast_window(win, trained.weights, configs[i]);
                if (auto m = eval::mape(win.actuals, point)) {
                    sum += *m;
                    ++n;
                }
            }
            if (n > 0) {
                cand.validation_mape = sum / static_cast<double>(n);
            } else {
                cand.error = "no validation window with a defined MAPE";
            }
            if (cand.validation_mape && (!best || ranks_before(cand, sel.candidates[*best]))) {
                best = i;
                sel.config = configs[i];
                sel.weights = std::move(trained.weights);
                sel.epoch_losses = std::move(trained.epoch_losses);
            }
        } catch (const std::exception& e) {
            cand.error = e.what();
        }
        sel.candidates.push_back(std::move(cand));
    }
    if (!best) throw std::runtime_error("select_model: every candidate failed");
    sel.best = *best;
    return sel;
}

}  // namespace techcast::deep

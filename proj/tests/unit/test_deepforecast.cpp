#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "techcast/autodiff.hpp"
#include "techcast/deepforecast.hpp"
#include "techcast/evalharness.hpp"
#include "techcast/ingest.hpp"

using namespace techcast;
using namespace techcast::deep;

namespace {

std::vector<double> scaled_sample(std::uint64_t seed) {
    const auto s = eval::gen_logistic(150, 0.1, 40, 72, 3.0, seed);
    return store::augment(s).front().scaled_values;
}

std::vector<store::TrainSample> training_set() {
    std::vector<store::TrainSample> out;
    for (int i = 0; i < 4; ++i) {
        const auto s = eval::gen_logistic(100 + 40 * i, 0.08, 50, 90, 2.0, static_cast<std::uint64_t>(i));
        const auto a = store::augment(s);
        out.insert(out.end(), a.begin(), a.end());
    }
    return out;
}

// Loss recomputed with the scalar step() and nll() for every prediction step.
double loss_oracle(const Weights& w, const std::vector<double>& x, std::size_t context) {
    NetState st = NetState::zeros(w);
    double total = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        auto [dist, next] = step(t == 0 ? 0.0 : x[t - 1], st, w);
        st = std::move(next);
        if (t >= context) total += nll(dist, x[t]);
    }
    return total / static_cast<double>(x.size() - context);
}

}  // namespace

TEST_CASE("tape gradients of a small expression") {
    ad::Tape tape;
    ad::Matrix a(2, 2);
    a << 0.3, -0.2, 0.5, 0.1;
    ad::Matrix x(2, 1);
    x << 1.5, -0.7;
    const auto va = tape.leaf(a);
    const auto vx = tape.leaf(x);
    const auto h = tape.tanh(tape.matmul(va, vx));
    const auto mu = tape.rows(h, 0, 1);
    const auto sigma = tape.add_constant(tape.softplus(tape.rows(h, 1, 1)), 1e-6);
    ad::Matrix target(1, 1);
    target << 0.25;
    const auto loss = tape.gaussian_nll_sum(mu, sigma, target);
    tape.backward(loss);

    const auto f = [&](const ad::Matrix& am) {
        const ad::Matrix z = (am * x).array().tanh().matrix();
        const double s = std::log1p(std::exp(z(1))) + 1e-6;
        return 0.5 * std::log(2 * std::numbers::pi) + std::log(s) + (0.25 - z(0)) * (0.25 - z(0)) / (2 * s * s);
    };
    CHECK(tape.value(loss)(0, 0) == doctest::Approx(f(a)));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            ad::Matrix p = a, m = a;
            p(i, j) += 1e-6;
            m(i, j) -= 1e-6;
            CHECK(tape.grad(va)(i, j) == doctest::Approx((f(p) - f(m)) / 2e-6).epsilon(1e-6));
        }
}

TEST_CASE("Gaussian NLL formula") {
    const StepDistribution d{1.0, 2.0};
    CHECK(nll(d, 3.0) == doctest::Approx(0.5 * std::log(2 * std::numbers::pi) + std::log(2.0) + 4.0 / 8.0));
}

TEST_CASE("tape loss matches the scalar unroll") {
    const auto x = scaled_sample(3);
    for (auto cell : {CellType::VanillaRNN, CellType::LSTM}) {
        const auto w = Weights::init(cell, 6, 2);
        std::vector<double> g;
        const double tape_loss = sample_loss_and_gradient(w, x, 36, g);
        CHECK(tape_loss == doctest::Approx(loss_oracle(w, x, 36)).epsilon(1e-12));
        CHECK(sample_loss(w, x, 36) == doctest::Approx(tape_loss).epsilon(1e-12));
        CHECK(g.size() == w.parameter_count());
    }
}

TEST_CASE("gradient check on both cells") {
    for (auto cell : {CellType::VanillaRNN, CellType::LSTM}) {
        const auto w = Weights::init(cell, 8, 5);
        const auto gc = gradient_check(w, scaled_sample(1), 36, 1e-5, 40, 3);
        CHECK(gc.checked == 40);
        CHECK(gc.max_relative_error < 1e-6);
    }
}

TEST_CASE("weight layout") {
    const auto lstm = Weights::init(CellType::LSTM, 5, 1);
    CHECK(lstm.parameter_count() == 4 * 5 * (1 + 5 + 1) + 2 * (5 + 1));
    for (Eigen::Index i = 0; i < 20; ++i) {
        const double centre = i >= 5 && i < 10 ? 1.0 : 0.0;
        CHECK(std::abs(lstm.bias(i, 0) - centre) <= 1 / std::sqrt(5.0));
    }
    const auto rnn = Weights::init(CellType::VanillaRNN, 5, 1);
    CHECK(rnn.parameter_count() == 5 * 7 + 12);
    for (double v : rnn.flatten()) CHECK(std::abs(v) <= 1 / std::sqrt(5.0));

    auto copy = Weights::zeros(CellType::LSTM, 5);
    copy.assign(lstm.flatten());
    CHECK(copy == lstm);
    CHECK(Weights::init(CellType::LSTM, 5, 1) == lstm);
    CHECK_FALSE(Weights::init(CellType::LSTM, 5, 2) == lstm);
}

TEST_CASE("step rejects non-finite input") {
    const auto w = Weights::init(CellType::LSTM, 4, 1);
    CHECK_THROWS_AS((void)step(std::nan(""), NetState::zeros(w), w), NonFiniteError);
    const auto [d, st] = step(0.5, NetState::zeros(w), w);
    CHECK(d.sigma > 0);
}

TEST_CASE("training lowers the loss and is reproducible") {
    const auto samples = training_set();
    ModelConfig c;
    c.hidden_size = 8;
    c.epochs = 12;
    c.batch_size = 32;
    c.learning_rate = 0.01;
    c.seed = 5;
    const auto a = train(samples, c);
    const auto b = train(samples, c);
    REQUIRE(a.epoch_losses.size() == 12);
    CHECK(a.epoch_losses.back() < a.epoch_losses.front());
    CHECK(a.weights == b.weights);
    CHECK(a.epoch_losses == b.epoch_losses);
    CHECK_THROWS_AS((void)train(std::vector<store::TrainSample>{}, c), std::invalid_argument);
}

TEST_CASE("ancestral forecasts") {
    const auto w = Weights::init(CellType::LSTM, 6, 4);
    ModelConfig c;
    c.hidden_size = 6;
    c.mc_samples = 25;
    const auto s = eval::gen_logistic(100, 0.1, 40, 60, 2.0, 1);
    const auto h = to_real(s.values);
    const auto f = forecast(h, w, c, 11);
    CHECK(f.paths.rows() == 25);
    CHECK(f.paths.cols() == 36);
    CHECK((f.paths.array() >= 0).all());
    for (Eigen::Index t = 0; t < 36; ++t)
        CHECK(f.point[static_cast<std::size_t>(t)] == doctest::Approx(f.paths.col(t).mean()).epsilon(1e-12));
    CHECK(forecast(h, w, c, 11).paths == f.paths);
    CHECK_FALSE(forecast(h, w, c, 12).paths == f.paths);
    const std::vector<double> short_h(35, 1.0);
    CHECK_THROWS_AS((void)forecast(short_h, w, c, 1), std::invalid_argument);
}

TEST_CASE("forecast scales with the scale factor") {
    const auto w = Weights::init(CellType::LSTM, 6, 4);
    const auto x = scaled_sample(2);
    const std::span<const double> cond(x.data(), 36);
    const auto base = forecast_scaled(cond, 1.0, w, 36, 10, 3);
    for (double alpha : {2.0, 8.0, 0.5}) {
        const auto f = forecast_scaled(cond, alpha, w, 36, 10, 3);
        CHECK((f.paths.array() == alpha * base.paths.array()).all());
    }
}

TEST_CASE("weights persist with their config") {
    const auto w = Weights::init(CellType::VanillaRNN, 7, 9);
    ModelConfig c;
    c.cell = CellType::VanillaRNN;
    c.hidden_size = 7;
    c.epochs = 3;
    const auto path = std::filesystem::temp_directory_path() / "techcast_unit_weights.json";
    save_weights(w, c, path);
    const auto [w2, c2] = load_weights(path);
    CHECK(w2 == w);
    CHECK(c2.epochs == 3);
    CHECK(to_json(c2) == to_json(c));
    auto doc = to_json(w, c);
    doc["format"] = "other";
    CHECK_THROWS((void)weights_from_json(doc));
}

TEST_CASE("model selection grid") {
    ModelConfig base;
    const std::vector<CellType> cells{CellType::VanillaRNN, CellType::LSTM};
    const std::vector<std::size_t> sizes{16, 32, 64};
    CHECK(config_grid(base, cells, sizes).size() == 6);

    const auto samples = training_set();
    base.epochs = 2;
    base.mc_samples = 5;
    const std::vector<std::size_t> tiny{2, 3};
    const auto grid = config_grid(base, std::vector<CellType>{CellType::VanillaRNN}, tiny);
    const auto val = store::make_all_windows(std::vector<MonthlySeries>{eval::gen_logistic(80, 0.1, 40, 120, 2, 8)});
    const auto sel = select_model(grid, samples, val);
    CHECK(sel.candidates.size() == 2);
    CHECK(sel.config.hidden_size == grid[sel.best].hidden_size);
    for (const auto& cand : sel.candidates) {
        REQUIRE(cand.validation_mape.has_value());
        CHECK(*sel.candidates[sel.best].validation_mape <= *cand.validation_mape);
    }
    CHECK_THROWS_AS((void)select_model(grid, samples, std::vector<store::ForecastWindow>{}), std::invalid_argument);
}

TEST_CASE("zero weights give the unit prior") {
    const auto w = Weights::zeros(CellType::LSTM, 4);
    for (double x : {0.0, 3.5, -2.0}) {
        const auto [d, st] = step(x, NetState::zeros(w), w);
        CHECK(d.mu == 0.0);
        CHECK(d.sigma == doctest::Approx(std::log(2.0) + 1e-6).epsilon(1e-15));
    }
    const auto v = Weights::init(CellType::VanillaRNN, 4, 2);
    const auto a = step(0.7, NetState::zeros(v), v);
    const auto b = step(0.7, NetState::zeros(v), v);
    CHECK(a.first.mu == b.first.mu);
    CHECK(a.first.sigma == b.first.sigma);
    CHECK(a.second.hidden == b.second.hidden);
}

TEST_CASE("worked NLL values") {
    const double half_log_2pi = 0.5 * std::log(2 * std::numbers::pi);
    CHECK(nll({0.0, 1.0}, 0.0) == doctest::Approx(half_log_2pi).epsilon(1e-15));
    CHECK(nll({0.0, 1.0}, 0.0) == doctest::Approx(0.9189).epsilon(1e-4));
    CHECK(nll({1.0, 0.5}, 2.0) == doctest::Approx(half_log_2pi + std::log(0.5) + 2.0).epsilon(1e-15));
    CHECK(nll({1.0, 0.5}, 2.0) == doctest::Approx(2.2258).epsilon(1e-4));
    CHECK(nll({1.0, 0.5}, 1.0) < nll({1.01, 0.5}, 1.0));
    CHECK(nll({1.0, 0.5}, 1.0) < nll({0.99, 0.5}, 1.0));
}

TEST_CASE("an all-zero sample leaves the input weights without gradient") {
    const std::vector<double> zeros(72, 0.0);
    for (auto cell : {CellType::VanillaRNN, CellType::LSTM}) {
        const auto w = Weights::init(cell, 5, 6);
        std::vector<double> g;
        (void)sample_loss_and_gradient(w, zeros, 36, g);
        const auto n_input = static_cast<std::size_t>(w.input.size());
        for (std::size_t i = 0; i < n_input; ++i) CHECK(g[i] == 0.0);
        double rest = 0.0;
        for (std::size_t i = n_input; i < g.size(); ++i) rest += std::abs(g[i]);
        CHECK(rest > 0.0);
    }
}

TEST_CASE("training on one constant sample") {
    store::TrainSample s;
    s.raw_values.assign(72, 20);
    s.scale = 21.0;
    s.scaled_values.assign(72, 20.0 / 21.0);
    s.split_index = 36;
    ModelConfig c;
    c.hidden_size = 8;
    c.epochs = 300;
    c.batch_size = 1;
    c.learning_rate = 0.01;
    c.seed = 3;
    const auto r = train(std::span<const store::TrainSample>(&s, 1), c);
    for (std::size_t e = 1; e < 10; ++e) CHECK(r.epoch_losses[e] < r.epoch_losses[e - 1]);
    NetState st = NetState::zeros(r.weights);
    StepDistribution d;
    for (std::size_t t = 0; t < 72; ++t) {
        auto [dist, next] = step(t == 0 ? 0.0 : s.scaled_values[t - 1], st, r.weights);
        d = dist;
        st = std::move(next);
    }
    CHECK(d.mu == doctest::Approx(20.0 / 21.0).epsilon(0.02));
}

TEST_CASE("a collapsed sigma head reproduces the mean unroll") {
    auto w = Weights::init(CellType::LSTM, 6, 8);
    w.sigma_w.setZero();
    w.sigma_b(0, 0) = -60.0;
    w.mu_b(0, 0) = 1.0;
    ModelConfig c;
    c.hidden_size = 6;
    c.mc_samples = 100;
    const auto s = eval::gen_logistic(200, 0.1, 40, 80, 2.0, 4);
    const auto h = to_real(s.values);
    const auto f = forecast(h, w, c, 9);
    CHECK(f.paths.rows() == 100);
    CHECK(f.paths.cols() == 36);
    CHECK(f.point.size() == 36);
    const auto mean = forecast_mean_unroll(h, w, c);
    REQUIRE(mean.size() == 36);
    for (Eigen::Index p = 0; p < f.paths.rows(); ++p)
        for (Eigen::Index t = 0; t < 36; ++t)
            CHECK(f.paths(p, t) ==
                  doctest::Approx(std::max(0.0, mean[static_cast<std::size_t>(t)])).epsilon(1e-4));
}

TEST_CASE("a model trained on constants forecasts the constant") {
    std::vector<store::TrainSample> samples;
    for (int level : {4, 6, 8, 13, 20, 35, 70, 120, 200, 400, 600}) {
        const MonthlySeries s{"c" + std::to_string(level), {2000, 1},
                              std::vector<std::int64_t>(100, static_cast<std::int64_t>(level))};
        const auto a = store::augment(s, store::kSampleLen, 4);
        samples.insert(samples.end(), a.begin(), a.end());
    }
    ModelConfig c;
    c.hidden_size = 8;
    c.epochs = 200;
    c.batch_size = 8;
    c.learning_rate = 0.003;
    c.mc_samples = 100;
    c.seed = 2;
    const auto r = train(samples, c);
    for (double level : {10.0, 50.0, 300.0}) {
        const std::vector<double> h(60, level);
        const auto f = forecast(h, r.weights, c, 5);
        for (double v : f.point) CHECK(v == doctest::Approx(level).epsilon(0.10));
    }
}

TEST_CASE("ties go to the smaller model, then to the vanilla cell") {
    const auto cand = [](std::optional<double> mape, std::size_t hidden, CellType cell) {
        CandidateScore c;
        c.config.hidden_size = hidden;
        c.config.cell = cell;
        c.validation_mape = mape;
        return c;
    };
    CHECK(ranks_before(cand(12.0, 64, CellType::LSTM), cand(12.5, 16, CellType::VanillaRNN)));
    CHECK(ranks_before(cand(12.0, 16, CellType::LSTM), cand(12.0, 32, CellType::VanillaRNN)));
    CHECK_FALSE(ranks_before(cand(12.0, 32, CellType::VanillaRNN), cand(12.0, 16, CellType::LSTM)));
    CHECK(ranks_before(cand(12.0, 16, CellType::VanillaRNN), cand(12.0, 16, CellType::LSTM)));
    CHECK(ranks_before(cand(500.0, 64, CellType::LSTM), cand(std::nullopt, 16, CellType::VanillaRNN)));
    CHECK_FALSE(ranks_before(cand(std::nullopt, 16, CellType::VanillaRNN), cand(500.0, 64, CellType::LSTM)));
}

TEST_CASE("fixture training for 50 epochs") {
    const auto series = ingest::load_series(std::filesystem::path(TECHCAST_FIXTURE_DIR) / "series_fixture.csv");
    std::vector<std::string> names;
    for (const auto& x : series) names.push_back(x.category_id);
    const auto split = store::split_categories(names, 7);
    std::vector<store::TrainSample> samples;
    for (const auto& x : series)
        if (std::find(split.train.begin(), split.train.end(), x.category_id) != split.train.end()) {
            const auto a = store::augment(x);
            samples.insert(samples.end(), a.begin(), a.end());
        }
    ModelConfig c;
    c.hidden_size = 16;
    c.epochs = 50;
    c.seed = 7;
    const auto a = train(samples, c);
    const auto b = train(samples, c);
    REQUIRE(a.epoch_losses.size() == 50);
    CHECK(a.epoch_losses.back() < a.epoch_losses.front());
    CHECK(a.epoch_losses == b.epoch_losses);
    CHECK(a.weights == b.weights);
}

#include <doctest.h>

#include <cstdlib>

#include "techcast/config.hpp"
#include "techcast/pipeline.hpp"

using namespace techcast;
using namespace techcast::cli;

TEST_CASE("defaults") {
    const ExperimentConfig c;
    CHECK(c.min_length == 108);
    CHECK(c.validation_fraction == 0.10);
    CHECK(c.test_fraction == 0.10);
    CHECK(c.rnn_batch_size == 64);
    CHECK(c.rnn_hidden_sizes == std::vector<std::size_t>{16, 32, 64});
    CHECK(c.methods.size() == 3);
}

TEST_CASE("sections, dotted keys and comments") {
    const auto c = parse_config(R"(
# comment
series_path = "data/series.csv"   # trailing
seed = 11
methods = ["fit", "arima"]
write_plots = false
split.test_fraction = 0.2

[rnn]
cells = ["rnn"]
hidden_sizes = [8, 12]
learning_rate = 5e-3
)");
    CHECK(c.series_path == "data/series.csv");
    CHECK(c.seed == 11);
    CHECK(c.methods == std::vector<eval::Method>{eval::Method::FIT, eval::Method::ARIMA});
    CHECK_FALSE(c.write_plots);
    CHECK(c.test_fraction == 0.2);
    CHECK(c.rnn_cells == std::vector<deep::CellType>{deep::CellType::VanillaRNN});
    CHECK(c.rnn_hidden_sizes == std::vector<std::size_t>{8, 12});
    CHECK(c.rnn_learning_rate == 5e-3);
}

TEST_CASE("resolved text reproduces the config") {
    auto c = parse_config("corpus_path = \"x.jsonl.gz\"\nscurve.initial_lambda = 0.01\narima.restarts = 5\n");
    c.rnn_learning_rate = 0.1 + 0.2;
    CHECK(parse_config(to_text(c)) == c);
    CHECK(parse_config(to_text(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("bad input is a usage error") {
    CHECK_THROWS_AS((void)parse_config("colour = \"blue\"\n"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_config("seed = -1\n"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_config("seed\n"), std::invalid_argument);
    CHECK_THROWS_AS((void)parse_config("methods = [\"fit\"\n"), std::invalid_argument);

    ExperimentConfig c;
    c.series_path = "s.csv";
    CHECK_NOTHROW(c.validate());
    c.test_fraction = 0.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    ExperimentConfig nopath;
    CHECK_THROWS_AS(nopath.validate(), std::invalid_argument);
}

TEST_CASE("TECHCAST_SEED overrides the seed") {
    ExperimentConfig c;
    c.seed = 1;
    ::setenv("TECHCAST_SEED", "99", 1);
    CHECK(apply_environment(c).seed == 99);
    ::setenv("TECHCAST_SEED", "x", 1);
    CHECK_THROWS_AS((void)apply_environment(c), std::invalid_argument);
    ::unsetenv("TECHCAST_SEED");
    CHECK(apply_environment(c).seed == 1);
}

TEST_CASE("base model config carries the grid-independent settings") {
    ExperimentConfig c;
    c.seed = 3;
    c.rnn_epochs = 9;
    c.rnn_mc_samples = 17;
    const auto m = c.base_model_config();
    CHECK(m.seed == 3);
    CHECK(m.epochs == 9);
    CHECK(m.mc_samples == 17);
    CHECK(m.batch_size == 64);
}

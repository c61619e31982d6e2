#include <doctest.h>

#include <cmath>
#include <numeric>

#include "techcast/arima.hpp"
#include "techcast/evalharness.hpp"
#include "techcast/simplex.hpp"

using namespace techcast;

TEST_CASE("residual recursion starts from a zero innovation") {
    const std::vector<double> y{1.0, 2.0, 0.5, 3.0};
    const double c = 0.2, phi = 0.6, theta = -0.3;
    const auto st = arima::residuals(y, c, phi, theta);
    std::vector<double> e(4, 0.0);
    for (std::size_t t = 1; t < 4; ++t) e[t] = y[t] - c - phi * y[t - 1] - theta * e[t - 1];
    REQUIRE(st.residuals.size() == 4);
    for (std::size_t t = 0; t < 4; ++t) CHECK(st.residuals[t] == doctest::Approx(e[t]).epsilon(1e-15));
    CHECK(st.css == doctest::Approx(e[1] * e[1] + e[2] * e[2] + e[3] * e[3]).epsilon(1e-15));
}

TEST_CASE("forecast recursion and its limit") {
    const arima::ArimaParams p{0.5, 0.4, 3.0, 1.0};
    const auto fc = arima::forecast(p, 10.0, 2.0, 60);
    CHECK(fc[0] == doctest::Approx(3.0 + 0.5 * 10.0 + 0.4 * 2.0));
    for (std::size_t h = 1; h < fc.size(); ++h) CHECK(fc[h] == doctest::Approx(3.0 + 0.5 * fc[h - 1]));
    CHECK(fc.back() == doctest::Approx(p.mean()).epsilon(1e-9));
    CHECK(p.mean() == doctest::Approx(6.0));
}

TEST_CASE("estimates recover a simulated process") {
    const auto sim = eval::gen_arima(0.5, 0.4, 1.0, 2.0, 3000, 17);
    const auto e = arima::estimate(sim.raw);
    CHECK(std::abs(e.params.phi - 0.5) < 0.07);
    CHECK(std::abs(e.params.theta - 0.4) < 0.07);
    CHECK(e.state.css <= arima::residuals(sim.raw, 1.0, 0.5, 0.4).css);
    CHECK(e.params.sigma2 == doctest::Approx(4.0).epsilon(0.1));
    CHECK(std::abs(e.params.phi) <= arima::kCoefficientBound);
    CHECK(e.state.css == doctest::Approx(arima::residuals(sim.raw, e.params.c, e.params.phi, e.params.theta).css));
    CHECK(e.params.sigma2 == doctest::Approx(e.state.css / static_cast<double>(sim.raw.size() - 3)));
}

TEST_CASE("estimation is deterministic and rejects tiny inputs") {
    const auto sim = eval::gen_arima(0.3, 0.2, 5.0, 1.0, 200, 4);
    const auto a = arima::estimate(sim.raw);
    const auto b = arima::estimate(sim.raw);
    CHECK(a.params.phi == b.params.phi);
    CHECK(a.params.theta == b.params.theta);
    CHECK(a.params.c == b.params.c);
    const std::vector<double> tiny(9, 1.0);
    CHECK_THROWS_AS((void)arima::estimate(tiny), std::invalid_argument);
}

TEST_CASE("constant history forecasts the constant") {
    const std::vector<double> flat(40, 7.0);
    const auto e = arima::estimate(flat);
    const auto fc = arima::forecast(e, flat.back());
    for (double v : fc) CHECK(v == doctest::Approx(7.0).epsilon(1e-3));
}

TEST_CASE("white noise simulation centres on c") {
    const auto sim = eval::gen_arima(0.0, 0.0, 4.0, 1.5, 5000, 8);
    const double mean = std::accumulate(sim.raw.begin(), sim.raw.end(), 0.0) / 5000.0;
    CHECK(std::abs(mean - 4.0) < 3 * 1.5 / std::sqrt(5000.0));
    CHECK(eval::gen_arima(0.0, 0.0, 4.0, 1.5, 50, 8).raw == eval::gen_arima(0.0, 0.0, 4.0, 1.5, 50, 8).raw);
    for (auto v : sim.series.values) CHECK(v >= 0);
    CHECK_THROWS_AS((void)eval::gen_arima(1.0, 0.0, 1.0, 1.0, 10, 1), std::invalid_argument);
}

TEST_CASE("Nelder-Mead minimizes a quadratic bowl") {
    const auto r = optim::nelder_mead(
        [](const std::vector<double>& x) { return (x[0] - 1) * (x[0] - 1) + 10 * (x[1] + 2) * (x[1] + 2); },
        {0.0, 0.0}, {0.5, 0.5});
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.x[1] == doctest::Approx(-2.0).epsilon(1e-4));
}

TEST_CASE("worked forecast recursions") {
    const auto decay = arima::forecast(arima::ArimaParams{0.5, 0.0, 0.0, 1.0}, 8.0, 0.0, 4);
    CHECK(decay == std::vector<double>{4.0, 2.0, 1.0, 0.5});

    const auto fc = arima::forecast(arima::ArimaParams{0.7, 0.3, 2.0, 1.0}, 10.0, 1.0, 2);
    CHECK(fc[0] == doctest::Approx(9.3).epsilon(1e-14));
    CHECK(fc[1] == doctest::Approx(8.51).epsilon(1e-14));

    // Distance to the mean halves each step when phi = 0.5.
    const arima::ArimaParams half{0.5, 0.2, 1.0, 1.0};
    const auto h = arima::forecast(half, 30.0, 3.0, 20);
    for (std::size_t i = 1; i < h.size(); ++i)
        CHECK(h[i] - half.mean() == doctest::Approx(0.5 * (h[i - 1] - half.mean())).epsilon(1e-12));
}

// On white noise the CSS minimum lies on the common-factor ridge phi = -theta,
// where c is free as well. Only the net dynamics and the mean are pinned down.
TEST_CASE("white noise around 10 estimates a flat process") {
    for (std::uint64_t seed : {31, 1, 2}) {
        const auto sim = eval::gen_arima(0.0, 0.0, 10.0, 1.0, 5000, seed);
        const auto e = arima::estimate(sim.raw);
        CHECK(std::abs(e.params.phi + e.params.theta) < 0.07);
        CHECK(std::abs(e.params.mean() - 10.0) < 0.07);
        CHECK(e.state.css <= arima::residuals(sim.raw, 10.0, 0.0, 0.0).css);
        const auto fc = arima::forecast(e, sim.raw.back());
        for (double v : fc) CHECK(std::abs(v - 10.0) < 0.2);
    }
}

TEST_CASE("five points are too few") {
    const std::vector<double> h{1, 2, 3, 4, 5};
    CHECK_THROWS_AS((void)arima::estimate(h), std::invalid_argument);
}

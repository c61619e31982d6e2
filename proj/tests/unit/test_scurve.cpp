#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "techcast/evalharness.hpp"
#include "techcast/scurve.hpp"

using namespace techcast;
using namespace techcast::scurve;

namespace {

double sse_oracle(const std::vector<double>& y, const SCurveParams& p) {
    double s = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double yhat = p.L / (1.0 + std::exp(-p.k * (static_cast<double>(t) - p.t0)));
        s += (y[t] - yhat) * (y[t] - yhat);
    }
    return s;
}

std::vector<double> curve(const SCurveParams& p, std::size_t n) {
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) y[t] = logistic(static_cast<double>(t), p);
    return y;
}

}  // namespace

TEST_CASE("logistic midpoint and saturation") {
    const SCurveParams p{100, 0.5, 10};
    CHECK(logistic(10, p) == doctest::Approx(50));
    CHECK(logistic(1e4, p) == doctest::Approx(100));
    CHECK(logistic(-1e4, p) == doctest::Approx(0));
}

TEST_CASE("default grid spans 64 cells built from the history") {
    const std::vector<double> h{1, 2, 3, 4, 5, 6, 7, 20, 9, 10};
    const auto g = default_grid(h);
    REQUIRE(g.size() == 64);
    for (const auto& c : g) {
        CHECK(c.L.hi == doctest::Approx(200));
        CHECK(c.k.lo == doctest::Approx(1e-4));
        CHECK(c.k.hi == doctest::Approx(2));
        CHECK(c.t0.lo == doctest::Approx(-10));
        CHECK(c.t0.hi == doctest::Approx(30));
        CHECK(c.init.L >= 20);
        CHECK(c.init.L <= 160);
    }
}

TEST_CASE("noiseless curves inside the grid are recovered") {
    for (const SCurveParams truth : {SCurveParams{200, 0.2, 30}, SCurveParams{1000, 0.08, 80}}) {
        const auto y = curve(truth, 100);
        const auto f = fit(y);
        CHECK(f.converged);
        CHECK(f.params.L == doctest::Approx(truth.L).epsilon(0.01));
        CHECK(f.params.k == doctest::Approx(truth.k).epsilon(0.01));
        CHECK(f.params.t0 == doctest::Approx(truth.t0).epsilon(0.01));
    }
}

TEST_CASE("the winner has the lowest SSE of all converged cells") {
    const auto s = eval::gen_logistic(300, 0.12, 25, 45, 6.0, 11);
    const auto y = to_real(s.values);
    const auto f = fit(y);
    REQUIRE(f.cells.size() == 64);
    CHECK(f.sse == doctest::Approx(sse_oracle(y, f.params)).epsilon(1e-12));
    for (const auto& c : f.cells) {
        if (c.converged) CHECK(f.sse <= c.sse);
        CHECK(c.sse == doctest::Approx(sse_oracle(y, c.params)).epsilon(1e-12));
    }
    CHECK(f.cells[f.grid_cell].sse == f.sse);
}

TEST_CASE("each cell stays inside its box and never raises the SSE") {
    const auto y = to_real(eval::gen_logistic(50, 0.3, 5, 30, 2.0, 2).values);
    const auto grid = default_grid(y);
    for (const auto& cell : grid) {
        const auto r = fit_cell(y, cell);
        CHECK(r.params.L >= cell.L.lo);
        CHECK(r.params.L <= cell.L.hi);
        CHECK(r.params.k >= cell.k.lo);
        CHECK(r.params.k <= cell.k.hi);
        CHECK(r.params.t0 >= cell.t0.lo);
        CHECK(r.params.t0 <= cell.t0.hi);
        SCurveParams start = cell.init;
        start.L = std::clamp(start.L, cell.L.lo, cell.L.hi);
        CHECK(r.sse <= sse_oracle(y, start) * (1 + 1e-12));
    }
}

TEST_CASE("fit is deterministic") {
    const auto y = to_real(eval::gen_logistic(120, 0.1, 40, 50, 3.0, 5).values);
    const auto a = fit(y);
    const auto b = fit(y);
    CHECK(a.params.L == b.params.L);
    CHECK(a.params.k == b.params.k);
    CHECK(a.params.t0 == b.params.t0);
    CHECK(a.grid_cell == b.grid_cell);
}

TEST_CASE("forecast continues the time index") {
    const SCurveParams p{100, 0.4, 50};
    const auto fc = forecast(p, 40, 36);
    REQUIRE(fc.size() == 36);
    CHECK(fc[10] == doctest::Approx(50));
    CHECK(fc[0] == doctest::Approx(logistic(40, p)));
    for (double v : fc) {
        CHECK(v > 0);
        CHECK(v < p.L);
    }
}

TEST_CASE("short histories are rejected") {
    const std::vector<double> h(7, 1.0);
    CHECK_THROWS_AS((void)fit(h), std::invalid_argument);
}

TEST_CASE("logistic worked values") {
    const SCurveParams p{100, 0.5, 10};
    CHECK(logistic(0, p) == doctest::Approx(100.0 / (1.0 + std::exp(5.0))).epsilon(1e-14));
    CHECK(logistic(0, p) == doctest::Approx(0.6693).epsilon(1e-4));
}

TEST_CASE("constant history fits a plateau at its level") {
    const std::vector<double> flat(36, 5.0);
    const auto f = fit(flat);
    CHECK(f.sse < 36 * 0.01);
    for (std::size_t t = 0; t < flat.size(); ++t)
        CHECK(logistic(static_cast<double>(t), f.params) == doctest::Approx(5.0).epsilon(0.01));
}

TEST_CASE("saturated and pre-spurt forecasts") {
    const auto plateau = forecast(SCurveParams{80, 0.3, -200}, 60, 36);
    for (double v : plateau) CHECK(v == doctest::Approx(80).epsilon(1e-9));

    const std::size_t len = 48;
    const SCurveParams p{300, 0.25, static_cast<double>(len + 10)};
    const auto spurt = forecast(p, len, 36);
    CHECK(spurt[10] == doctest::Approx(150));
    CHECK(spurt[9] < 150);
    CHECK(spurt[11] > 150);
    CHECK(spurt.back() > 10 * spurt.front());
}

TEST_CASE("four points are too few") {
    const std::vector<double> h{1, 2, 3, 4};
    CHECK_THROWS_AS((void)fit(h), std::invalid_argument);
}

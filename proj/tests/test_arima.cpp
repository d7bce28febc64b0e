#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "wordlelab/arima.hpp"
#include "wordlelab/errors.hpp"
#include "wordlelab/stats.hpp"

using namespace wordlelab;

namespace {

std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, sigma);
    std::vector<double> out(n);
    for (auto& v : out) v = dist(rng);
    return out;
}

std::vector<double> simulate_ar1(std::size_t n, double phi, std::uint64_t seed) {
    const auto eps = white_noise(n + 100, seed);
    std::vector<double> x(n + 100, 0.0);
    for (std::size_t t = 1; t < x.size(); ++t) x[t] = phi * x[t - 1] + eps[t];
    return {x.begin() + 100, x.end()};
}

std::vector<double> simulate_ar2(std::size_t n, double phi1, double phi2, std::uint64_t seed) {
    const auto eps = white_noise(n + 200, seed);
    std::vector<double> x(n + 200, 0.0);
    for (std::size_t t = 2; t < x.size(); ++t) {
        x[t] = phi1 * x[t - 1] + phi2 * x[t - 2] + eps[t];
    }
    return {x.begin() + 200, x.end()};
}

std::vector<double> simulate_ma1(std::size_t n, double theta, std::uint64_t seed) {
    const auto eps = white_noise(n + 1, seed);
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) x[t] = eps[t + 1] + theta * eps[t];
    return x;
}

std::vector<double> simulate_arma11(std::size_t n, double phi, double theta, std::uint64_t seed) {
    const auto eps = white_noise(n + 100, seed);
    std::vector<double> x(n + 100, 0.0);
    for (std::size_t t = 1; t < x.size(); ++t) {
        x[t] = phi * x[t - 1] + eps[t] + theta * eps[t - 1];
    }
    return {x.begin() + 100, x.end()};
}

std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
    const auto eps = white_noise(n, seed);
    std::vector<double> x(n, 0.0);
    x[0] = eps[0];
    for (std::size_t t = 1; t < n; ++t) x[t] = x[t - 1] + eps[t];
    return x;
}

}  // namespace

TEST_CASE("difference hand examples") {
    CHECK(arima::difference({1, 2, 3, 4}, 1) == std::vector<double>{1, 1, 1});
    CHECK(arima::difference({1, 4, 9, 16}, 2) == std::vector<double>{2, 2});
    const std::vector<double> same = {3, 1, 4, 1, 5};
    CHECK(arima::difference(same, 0) == same);
    CHECK_THROWS_AS(arima::difference({1, 2}, 2), std::invalid_argument);
    CHECK_THROWS_AS(arima::difference({1, 2, 3}, -1), std::invalid_argument);
}

TEST_CASE("difference then undifference reconstructs the series") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-50.0, 50.0);
    for (int d = 0; d <= 2; ++d) {
        std::vector<double> y(40);
        for (auto& v : y) v = dist(rng);
        const auto w = arima::difference(y, d);
        // Split: history = first 20 original points, reconstruct the rest.
        const std::size_t m = 20;
        const std::vector<double> history(y.begin(), y.begin() + m);
        const std::vector<double> tail_diffs(w.begin() + (m - d), w.end());
        const auto reconstructed = arima::undifference(tail_diffs, history, d);
        REQUIRE(reconstructed.size() == y.size() - m);
        for (std::size_t i = 0; i < reconstructed.size(); ++i) {
            CHECK(reconstructed[i] == doctest::Approx(y[m + i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("acf follows the stated normalization exactly") {
    const auto r = arima::acf({1, 2, 3, 4, 5}, 2);
    CHECK(r[0] == 1.0);
    CHECK(r[1] == 0.5);  // numerator 1, denominator 2, no rounding involved
    CHECK(r[2] == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
    CHECK_THROWS_AS(arima::acf({1, 1, 1, 1}, 1), ComputationError);
    CHECK_THROWS_AS(arima::acf({1, 2}, 2), std::invalid_argument);
}

TEST_CASE("acf of white noise concentrates near zero") {
    const auto x = white_noise(1000, 314159);
    const auto r = arima::acf(x, 10);
    for (int lag = 1; lag <= 10; ++lag) CHECK(std::abs(r[lag]) < 0.1);
}

TEST_CASE("pacf(1) equals acf(1) on random series") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto x = white_noise(200, seed * 7919);
        const auto r = arima::acf(x, 5);
        const auto p = arima::pacf(x, 5);
        CHECK(std::abs(p[1] - r[1]) < 1e-12);
    }
}

TEST_CASE("pacf of an AR(1) cuts off after lag 1") {
    const auto x = simulate_ar1(4000, 0.7, 42);
    const auto p = arima::pacf(x, 6);
    CHECK(p[1] == doctest::Approx(0.7).epsilon(0.1));
    for (int lag = 2; lag <= 6; ++lag) CHECK(std::abs(p[lag]) < 0.08);
}

TEST_CASE("MA(1) signature: acf cuts off, pacf decays") {
    const auto x = simulate_ma1(6000, 0.8, 99);
    const auto r = arima::acf(x, 5);
    const auto p = arima::pacf(x, 5);
    // theoretical acf(1) = theta / (1 + theta^2) ~= 0.4878
    CHECK(r[1] == doctest::Approx(0.8 / 1.64).epsilon(0.15));
    for (int lag = 2; lag <= 5; ++lag) CHECK(std::abs(r[lag]) < 0.08);
    CHECK(std::abs(p[2]) > 0.1);  // pacf still alive past lag 1
}

TEST_CASE("mackinnon p-values match the frozen reference points") {
    // Reference values from the same response-surface regression evaluated
    // independently.
    CHECK(arima::mackinnon_p_const(-3.43) == doctest::Approx(0.009977709398779726).epsilon(1e-9));
    CHECK(arima::mackinnon_p_const(-2.86) == doctest::Approx(0.05020109988200309).epsilon(1e-9));
    CHECK(arima::mackinnon_p_const(-2.0) == doctest::Approx(0.28657309916843154).epsilon(1e-9));
    CHECK(arima::mackinnon_p_const(-1.61) == doctest::Approx(0.4779756525941893).epsilon(1e-9));
    CHECK(arima::mackinnon_p_const(-1.0) == doctest::Approx(0.7532643012005655).epsilon(1e-9));
    CHECK(arima::mackinnon_p_const(0.0) == doctest::Approx(0.958532086060056).epsilon(1e-9));
    CHECK(arima::mackinnon_p_const(1.0) == doctest::Approx(0.9942659485477608).epsilon(1e-9));
    CHECK(arima::mackinnon_p_const(-25.0) == 0.0);
    CHECK(arima::mackinnon_p_const(5.0) == 1.0);
}

TEST_CASE("adf_test separates random walks from stationary series") {
    int walk_high = 0, ar_low = 0;
    const int trials = 20;
    for (int s = 0; s < trials; ++s) {
        const auto walk = random_walk(500, 1000 + static_cast<std::uint64_t>(s));
        const auto ar = simulate_ar1(500, 0.5, 2000 + static_cast<std::uint64_t>(s));
        const int lag = arima::default_adf_lag(500);
        if (arima::adf_test(walk, lag).p_value > 0.05) ++walk_high;
        if (arima::adf_test(ar, lag).p_value < 0.05) ++ar_low;
    }
    CHECK(walk_high >= 17);  // size ~5% under the unit root
    CHECK(ar_low == trials); // the test has huge power here
}

TEST_CASE("adf_test validates inputs") {
    CHECK_THROWS_AS(arima::adf_test({1, 2, 3}, 5), std::invalid_argument);
    CHECK(arima::default_adf_lag(500) == 17);
    CHECK(arima::default_adf_lag(100) == 12);
}

TEST_CASE("fit_arima (0,0,0) recovers mean and variance") {
    const auto x = white_noise(500, 8, 2.0);
    const auto model = arima::fit_arima(x, 0, 0, 0, 1);
    CHECK(model.constant == doctest::Approx(stats::mean(x)).epsilon(1e-6));
    CHECK(model.residual_variance == doctest::Approx(stats::variance(x)).epsilon(1e-4));
}

TEST_CASE("fit_arima recovers an MA(1) coefficient") {
    const auto x = simulate_ma1(2000, 0.6, 31337);
    const auto model = arima::fit_arima(x, 0, 0, 1, 5);
    REQUIRE(model.ma_coeffs.size() == 1);
    CHECK(std::abs(model.ma_coeffs[0] - 0.6) < 0.1);
    CHECK(std::abs(model.constant) < 0.1);
}

TEST_CASE("fit_arima recovers ARMA(1,1) coefficients") {
    const auto x = simulate_arma11(2000, 0.5, 0.3, 271828);
    const auto model = arima::fit_arima(x, 1, 0, 1, 5);
    REQUIRE(model.ar_coeffs.size() == 1);
    REQUIRE(model.ma_coeffs.size() == 1);
    CHECK(std::abs(model.ar_coeffs[0] - 0.5) < 0.1);
    CHECK(std::abs(model.ma_coeffs[0] - 0.3) < 0.1);
}

TEST_CASE("fitted models satisfy stationarity and invertibility") {
    const auto x = simulate_arma11(800, 0.6, 0.4, 5150);
    const auto model = arima::fit_arima(x, 1, 0, 1, 7);
    CHECK(std::abs(model.ar_coeffs[0]) < 1.0);
    CHECK(std::abs(model.ma_coeffs[0]) < 1.0);
}

TEST_CASE("select_orders prefers the generating structure") {
    int ma1_hits = 0, ar2_hits = 0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto ma = simulate_ma1(600, 0.6, 9100 + s);
        const auto sel_ma = arima::select_orders(ma, 0, 2, s);
        if (sel_ma.p == 0 && sel_ma.q == 1) ++ma1_hits;

        const auto ar = simulate_ar2(600, 0.5, 0.3, 9200 + s);
        const auto sel_ar = arima::select_orders(ar, 0, 2, s);
        if (sel_ar.p == 2 && sel_ar.q == 0) ++ar2_hits;
    }
    CHECK(ma1_hits >= 3);
    CHECK(ar2_hits >= 3);
}

TEST_CASE("select_orders emits diagnostics") {
    const auto x = simulate_ma1(400, 0.5, 4242);
    const auto sel = arima::select_orders(x, 0, 1, 3);
    CHECK(!sel.acf.empty());
    CHECK(!sel.pacf.empty());
    CHECK(sel.grid.size() == 4);
    for (const auto& cand : sel.grid) CHECK(cand.converged);
}

TEST_CASE("ljung_box behaves on white noise and on autocorrelated residuals") {
    int high = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto x = white_noise(500, 71000 + s);
        if (arima::ljung_box(x, 10).p_value > 0.05) ++high;
    }
    CHECK(high >= 9);

    const auto ar = simulate_ar1(500, 0.8, 3);
    CHECK(arima::ljung_box(ar, 10).p_value < 0.01);

    CHECK_THROWS_AS(arima::ljung_box(std::vector<double>(100, 0.0), 10), ComputationError);
    CHECK_THROWS_AS(arima::ljung_box({1.0, 2.0}, 5), std::invalid_argument);
    CHECK_THROWS_AS(arima::ljung_box(white_noise(100, 1), 5, 5), std::invalid_argument);
}

TEST_CASE("ljung_box dof adjustment lowers the degrees of freedom") {
    const auto x = white_noise(300, 12345);
    const auto full = arima::ljung_box(x, 10, 0);
    const auto adjusted = arima::ljung_box(x, 10, 3);
    CHECK(full.statistic == doctest::Approx(adjusted.statistic));
    CHECK(adjusted.dof == 7);
    CHECK(full.dof == 10);
}

TEST_CASE("forecast of a mean model is flat at the constant") {
    const auto x = white_noise(200, 21);
    const auto model = arima::fit_arima(x, 0, 0, 0, 1);
    const auto f = arima::forecast(model, 5);
    for (double v : f) CHECK(v == doctest::Approx(model.constant));
}

TEST_CASE("forecast of a driftless random walk model is the last value") {
    arima::ArimaModel model;
    model.p = 0;
    model.d = 1;
    model.q = 0;
    model.constant = 0.0;
    model.series = {10, 12, 11, 14, 13};
    model.differenced = arima::difference(model.series, 1);
    model.residuals.assign(model.differenced.size(), 0.0);
    const auto f = arima::forecast(model, 4);
    for (double v : f) CHECK(v == doctest::Approx(13.0));
}

TEST_CASE("(0,1,1) forecast has constant increments past the first step") {
    std::vector<double> y = random_walk(300, 55);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.2 * static_cast<double>(i);
    const auto model = arima::fit_arima(y, 0, 1, 1, 9);
    const auto f = arima::forecast(model, 6);
    const double increment = f[1] - f[0];
    for (std::size_t h = 2; h < f.size(); ++h) {
        CHECK(f[h] - f[h - 1] == doctest::Approx(increment).epsilon(1e-9));
        CHECK(f[h] - f[h - 1] == doctest::Approx(model.constant).epsilon(1e-9));
    }
    CHECK_THROWS_AS(arima::forecast(model, 0), std::invalid_argument);
}

TEST_CASE("prediction_interval examples") {
    const auto exact = arima::prediction_interval(500.0, {100, 200}, {100, 200});
    CHECK(exact.len == doctest::Approx(0.0));
    CHECK(exact.lower == doctest::Approx(500.0));
    CHECK(exact.upper == doctest::Approx(500.0));

    const auto hand = arima::prediction_interval(1000.0, {100, 200}, {90, 220});
    CHECK(hand.len == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(hand.lower == doctest::Approx(900.0));
    CHECK(hand.upper == doctest::Approx(1100.0));

    CHECK_THROWS_AS(arima::prediction_interval(10.0, {0.0}, {1.0}), ComputationError);
    CHECK_THROWS_AS(arima::prediction_interval(10.0, {}, {}), std::invalid_argument);
    CHECK_THROWS_AS(arima::prediction_interval(10.0, {1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("prediction_interval is scale-equivariant") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> dist(50.0, 150.0);
    std::vector<double> t(10), p(10);
    for (std::size_t i = 0; i < 10; ++i) {
        t[i] = dist(rng);
        p[i] = dist(rng);
    }
    const auto base = arima::prediction_interval(1234.0, t, p);
    auto t2 = t;
    auto p2 = p;
    for (auto& v : t2) v *= 3.5;
    for (auto& v : p2) v *= 3.5;
    const auto scaled = arima::prediction_interval(1234.0 * 3.5, t2, p2);
    CHECK(scaled.len == doctest::Approx(base.len).epsilon(1e-12));
    CHECK(scaled.lower == doctest::Approx(base.lower * 3.5).epsilon(1e-12));
    CHECK(scaled.upper == doctest::Approx(base.upper * 3.5).epsilon(1e-12));
}

TEST_CASE("sensitivity_sweep") {
    // Hand-built (0,1,1) model with positive stored residuals.
    arima::ArimaModel model;
    model.p = 0;
    model.d = 1;
    model.q = 1;
    model.constant = 0.0;
    model.ma_coeffs = {0.5};
    model.series = {100, 102, 105, 106, 110};
    model.differenced = arima::difference(model.series, 1);
    model.residuals = {0.5, 1.0, 0.25, 2.0};

    // Replacing the coefficient with its fitted value leaves the forecast alone.
    const auto noop = arima::sensitivity_sweep(model, {0.5}, 3);
    REQUIRE(noop.size() == 1);
    CHECK(noop[0].second == doctest::Approx(arima::forecast(model, 3).back()));

    // Monotone in the coefficient when the stored residuals share a sign.
    const auto sweep = arima::sensitivity_sweep(model, {0.3, 0.35, 0.4, 0.45}, 2);
    REQUIRE(sweep.size() == 4);
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        CHECK(sweep[i].second > sweep[i - 1].second);
        CHECK(sweep[i].first == doctest::Approx(0.3 + 0.05 * static_cast<double>(i)));
    }

    CHECK(arima::sensitivity_sweep(model, {}, 2).empty());
    CHECK_THROWS_AS(arima::sensitivity_sweep(model, {1.5}, 2), ComputationError);

    arima::ArimaModel bare;
    bare.series = {1, 2, 3};
    bare.differenced = bare.series;
    CHECK_THROWS_AS(arima::sensitivity_sweep(bare, {0.5}, 2), std::invalid_argument);
}

TEST_CASE("aic is computable and finite after a fit") {
    const auto x = simulate_ma1(300, 0.4, 6);
    const auto model = arima::fit_arima(x, 0, 0, 1, 2);
    CHECK(std::isfinite(model.aic()));
}

#include "wordlelab/arima.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "wordlelab/errors.hpp"
#include "wordlelab/optimize.hpp"
#include "wordlelab/stats.hpp"

namespace wordlelab::arima {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// All roots of c0 + c1 z + ... + cn z^n strictly inside the unit circle
// (Schur-Cohn reduction).
bool roots_inside_unit_disk(std::vector<double> c) {
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
    while (c.size() > 1) {
        const std::size_t n = c.size() - 1;
        const double a0 = c.front();
        const double an = c.back();
        if (std::abs(a0) >= std::abs(an)) return false;
        std::vector<double> next(n);
        for (std::size_t k = 0; k < n; ++k) next[k] = an * c[k + 1] - a0 * c[n - 1 - k];
        c = std::move(next);
        while (c.size() > 1 && c.back() == 0.0) c.pop_back();
    }
    return true;
}

// AR polynomial 1 - sum g_j z^j has all roots outside the unit circle iff
// z^p - g_1 z^{p-1} - ... - g_p has all roots inside it.
bool ar_stationary(const std::vector<double>& ar) {
    if (ar.empty()) return true;
    std::vector<double> c(ar.size() + 1);
    c.back() = 1.0;
    for (std::size_t j = 0; j < ar.size(); ++j) c[ar.size() - 1 - j] = -ar[j];
    return roots_inside_unit_disk(std::move(c));
}

// MA polynomial 1 + sum t_j z^j, same reduction on the reversed polynomial.
bool ma_invertible(const std::vector<double>& ma) {
    if (ma.empty()) return true;
    std::vector<double> c(ma.size() + 1);
    c.back() = 1.0;
    for (std::size_t j = 0; j < ma.size(); ++j) c[ma.size() - 1 - j] = ma[j];
    return roots_inside_unit_disk(std::move(c));
}

// Conditional residuals of the ARMA recursion on `w`; residuals before
// index p are conditioning zeros.
void arma_residuals(const std::vector<double>& w, double constant, const std::vector<double>& ar,
                    const std::vector<double>& ma, std::vector<double>& resid) {
    const std::size_t n = w.size();
    const std::size_t p = ar.size();
    const std::size_t q = ma.size();
    resid.assign(n, 0.0);
    for (std::size_t t = p; t < n; ++t) {
        double pred = constant;
        for (std::size_t j = 0; j < p; ++j) pred += ar[j] * w[t - 1 - j];
        for (std::size_t j = 0; j < q && t >= j + 1; ++j) pred += ma[j] * resid[t - 1 - j];
        resid[t] = w[t] - pred;
    }
}

double css_value(const std::vector<double>& w, double constant, const std::vector<double>& ar,
                 const std::vector<double>& ma, std::vector<double>& scratch) {
    if (!ar_stationary(ar) || !ma_invertible(ma)) return kInf;
    arma_residuals(w, constant, ar, ma, scratch);
    double css = 0.0;
    for (std::size_t t = ar.size(); t < w.size(); ++t) css += scratch[t] * scratch[t];
    return std::isfinite(css) ? css : kInf;
}

void unpack(const std::vector<double>& theta, int p, int q, double& constant,
            std::vector<double>& ar, std::vector<double>& ma) {
    constant = theta[0];
    ar.assign(theta.begin() + 1, theta.begin() + 1 + p);
    ma.assign(theta.begin() + 1 + p, theta.begin() + 1 + p + q);
}

}  // namespace

double ArimaModel::aic() const {
    const double n = static_cast<double>(n_effective);
    const double s2 = std::max(css / n, 1e-300);
    return n * std::log(s2) + 2.0 * static_cast<double>(p + q + 1);
}

std::vector<double> difference(const std::vector<double>& series, int d) {
    if (d < 0) throw std::invalid_argument("difference: d must be >= 0");
    if (series.size() <= static_cast<std::size_t>(d)) {
        throw std::invalid_argument("difference: series too short for order " + std::to_string(d));
    }
    std::vector<double> out = series;
    for (int round = 0; round < d; ++round) {
        for (std::size_t i = 0; i + 1 < out.size(); ++i) out[i] = out[i + 1] - out[i];
        out.pop_back();
    }
    return out;
}

std::vector<double> undifference(const std::vector<double>& future_diffs,
                                 const std::vector<double>& history, int d) {
    if (d < 0) throw std::invalid_argument("undifference: d must be >= 0");
    if (history.size() <= static_cast<std::size_t>(d) && d > 0) {
        throw std::invalid_argument("undifference: history too short for order " +
                                    std::to_string(d));
    }
    std::vector<double> values = future_diffs;
    for (int level = d; level >= 1; --level) {
        double anchor = difference(history, level - 1).back();
        for (double& v : values) {
            anchor += v;
            v = anchor;
        }
    }
    return values;
}

std::vector<double> acf(const std::vector<double>& series, int max_lag) {
    if (max_lag < 0) throw std::invalid_argument("acf: max_lag must be >= 0");
    const std::size_t n = series.size();
    if (n <= static_cast<std::size_t>(max_lag)) {
        throw std::invalid_argument("acf: series length must exceed max_lag");
    }
    const double m = stats::mean(series);
    double denom = 0.0;
    for (double x : series) denom += (x - m) * (x - m);
    denom /= static_cast<double>(n);
    if (denom == 0.0) throw ComputationError("acf: zero-variance series");

    std::vector<double> out(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (int lag = 0; lag <= max_lag; ++lag) {
        double num = 0.0;
        for (std::size_t j = static_cast<std::size_t>(lag); j < n; ++j) {
            num += (series[j] - m) * (series[j - lag] - m);
        }
        num /= static_cast<double>(n - lag);
        out[lag] = num / denom;
    }
    return out;
}

std::vector<double> pacf(const std::vector<double>& series, int max_lag) {
    const std::vector<double> rho = acf(series, max_lag);
    std::vector<double> out(rho.size(), 0.0);
    out[0] = 1.0;
    if (max_lag == 0) return out;

    // Durbin-Levinson recursion.
    std::vector<double> phi_prev, phi_cur;
    for (int m = 1; m <= max_lag; ++m) {
        double num = rho[m];
        double den = 1.0;
        for (int k = 1; k < m; ++k) {
            num -= phi_prev[k - 1] * rho[m - k];
            den -= phi_prev[k - 1] * rho[k];
        }
        if (std::abs(den) < 1e-12) {
            throw ComputationError("pacf: Durbin-Levinson system singular at lag " +
                                   std::to_string(m));
        }
        const double phi_mm = num / den;
        phi_cur.assign(m, 0.0);
        for (int k = 1; k < m; ++k) {
            phi_cur[k - 1] = phi_prev[k - 1] - phi_mm * phi_prev[m - k - 1];
        }
        phi_cur[m - 1] = phi_mm;
        out[m] = phi_mm;
        phi_prev = phi_cur;
    }
    return out;
}

int default_adf_lag(std::size_t n) {
    const int lag = static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
    return std::max(lag, 1);
}

double mackinnon_p_const(double t_statistic) {
    // MacKinnon (1994) response-surface coefficients, regression with
    // constant, one variable: p = Phi(polynomial(t)).
    constexpr double kTauMin = -18.83;
    constexpr double kTauMax = 2.74;
    constexpr double kTauStar = -1.61;
    if (t_statistic < kTauMin) return 0.0;
    if (t_statistic > kTauMax) return 1.0;
    const double t = t_statistic;
    double z;
    if (t <= kTauStar) {
        z = 2.1659 + 1.4412 * t + 0.038269 * t * t;
    } else {
        z = 1.7339 + 0.93202 * t - 0.12745 * t * t - 0.010368 * t * t * t;
    }
    return stats::normal_cdf(z);
}

AdfResult adf_test(const std::vector<double>& series, int max_lag) {
    if (max_lag < 0) throw std::invalid_argument("adf_test: max_lag must be >= 0");
    const std::size_t n = series.size();
    if (n < static_cast<std::size_t>(max_lag) + 10) {
        throw std::invalid_argument("adf_test: series length must be at least max_lag + 10");
    }

    // dy_t = alpha + beta * y_{t-1} + sum_i c_i dy_{t-i} + e_t
    std::vector<double> dy(n - 1);
    for (std::size_t t = 1; t < n; ++t) dy[t - 1] = series[t] - series[t - 1];

    const std::size_t first = static_cast<std::size_t>(max_lag) + 1;  // index into y
    const std::size_t rows = n - 1 - static_cast<std::size_t>(max_lag);
    const std::size_t cols = 2 + static_cast<std::size_t>(max_lag);

    stats::Matrix x(rows, std::vector<double>(cols, 0.0));
    std::vector<double> y(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = first + r;
        y[r] = dy[t - 1];
        x[r][0] = 1.0;
        x[r][1] = series[t - 1];
        for (int i = 1; i <= max_lag; ++i) x[r][1 + i] = dy[t - 1 - i];
    }

    // Center the non-constant regressors; this only reparameterizes the
    // intercept and leaves the t-statistic on beta unchanged.
    for (std::size_t c = 1; c < cols; ++c) {
        double m = 0.0;
        for (std::size_t r = 0; r < rows; ++r) m += x[r][c];
        m /= static_cast<double>(rows);
        for (std::size_t r = 0; r < rows; ++r) x[r][c] -= m;
    }

    stats::OlsFit fit;
    try {
        fit = stats::ols(x, y);
    } catch (const ComputationError&) {
        throw ComputationError("adf_test: singular regression matrix");
    }
    if (fit.std_errors[1] <= 0.0 || !std::isfinite(fit.std_errors[1])) {
        throw ComputationError("adf_test: singular regression matrix");
    }

    AdfResult result;
    result.statistic = fit.coefficients[1] / fit.std_errors[1];
    result.p_value = mackinnon_p_const(result.statistic);
    result.lags_used = max_lag;
    return result;
}

// ---------------------------------------------------------------------------
// Estimation
// ---------------------------------------------------------------------------

ArimaModel fit_arima(const std::vector<double>& series, int p, int d, int q, std::uint64_t seed) {
    if (p < 0 || d < 0 || q < 0) throw std::invalid_argument("fit_arima: invalid orders");
    if (series.size() < static_cast<std::size_t>(p + q + d + 10)) {
        throw std::invalid_argument("fit_arima: series length must be at least p+q+d+10");
    }

    const std::vector<double> w = difference(series, d);
    const int dim = 1 + p + q;
    const double w_mean = stats::mean(w);
    const double w_sd = std::sqrt(std::max(stats::variance(w), 1e-12));

    std::vector<double> scratch;
    auto objective = [&](const std::vector<double>& theta) {
        double constant;
        std::vector<double> ar, ma;
        unpack(theta, p, q, constant, ar, ma);
        return css_value(w, constant, ar, ma, scratch);
    };

    // Multistart: a deterministic start at the sample mean plus seeded
    // perturbed starts. Coefficient draws near the origin are always
    // stationary/invertible; shrink any draw that is not.
    constexpr int kStarts = 6;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coeff_dist(-0.5, 0.5);
    std::uniform_real_distribution<double> mean_dist(-0.5, 0.5);

    std::vector<std::vector<double>> starts;
    starts.reserve(kStarts);
    {
        std::vector<double> s(dim, 0.0);
        s[0] = w_mean;
        starts.push_back(std::move(s));
    }
    for (int k = 1; k < kStarts; ++k) {
        std::vector<double> s(dim, 0.0);
        s[0] = w_mean + w_sd * mean_dist(rng);
        for (int j = 1; j < dim; ++j) s[j] = coeff_dist(rng);
        for (int shrink = 0; shrink < 8 && !std::isfinite(objective(s)); ++shrink) {
            for (int j = 1; j < dim; ++j) s[j] *= 0.5;
        }
        if (!std::isfinite(objective(s))) {
            std::fill(s.begin() + 1, s.end(), 0.0);
        }
        starts.push_back(std::move(s));
    }

    optimize::NelderMeadOptions options;
    options.max_iterations = 500 * dim;
    options.initial_step = 0.1;

    std::vector<double> best_x;
    double best_f = kInf;
    for (const auto& start : starts) {
        const auto result = optimize::nelder_mead(objective, start, options);
        if (result.value < best_f) {
            best_f = result.value;
            best_x = result.x;
        }
    }
    if (!std::isfinite(best_f)) {
        throw ComputationError("fit_arima: optimizer found no admissible parameters");
    }

    ArimaModel model;
    model.p = p;
    model.d = d;
    model.q = q;
    unpack(best_x, p, q, model.constant, model.ar_coeffs, model.ma_coeffs);
    model.series = series;
    model.differenced = w;
    arma_residuals(w, model.constant, model.ar_coeffs, model.ma_coeffs, model.residuals);
    model.css = best_f;
    model.n_effective = w.size() - static_cast<std::size_t>(p);
    model.residual_variance = model.css / static_cast<double>(model.n_effective);
    return model;
}

OrderSelection select_orders(const std::vector<double>& series, int d, int max_order,
                             std::uint64_t seed) {
    if (max_order < 0) throw std::invalid_argument("select_orders: max_order must be >= 0");
    OrderSelection sel;
    const std::vector<double> w = difference(series, d);
    const int diag_lag = std::min<int>(20, static_cast<int>(w.size()) / 4);
    if (diag_lag >= 1) {
        try {
            sel.acf = acf(w, diag_lag);
            sel.pacf = pacf(w, diag_lag);
        } catch (const ComputationError&) {
            // zero-variance series: no autocorrelation diagnostics to emit
            sel.acf.clear();
            sel.pacf.clear();
        }
    }

    // AIC values are only comparable over a common sample: score every
    // candidate's residuals on the window conditioned at max_order, not at
    // its own p.
    const std::size_t skip = static_cast<std::size_t>(max_order);
    if (w.size() <= skip + 1) throw std::invalid_argument("select_orders: series too short");

    for (int p = 0; p <= max_order; ++p) {
        for (int q = 0; q <= max_order; ++q) {
            OrderCandidate cand;
            cand.p = p;
            cand.q = q;
            try {
                const ArimaModel model = fit_arima(series, p, d, q, seed);
                double css = 0.0;
                for (std::size_t t = skip; t < w.size(); ++t) {
                    css += model.residuals[t] * model.residuals[t];
                }
                const double n_common = static_cast<double>(w.size() - skip);
                cand.aic = n_common * std::log(std::max(css / n_common, 1e-300)) +
                           2.0 * static_cast<double>(p + q + 1);
                cand.converged = true;
            } catch (const Error&) {
                cand.converged = false;
            } catch (const std::invalid_argument&) {
                cand.converged = false;
            }
            sel.grid.push_back(cand);
        }
    }

    double min_aic = kInf;
    for (const auto& cand : sel.grid) {
        if (cand.converged && cand.aic < min_aic) min_aic = cand.aic;
    }
    if (!std::isfinite(min_aic)) throw ComputationError("select_orders: no model converged");

    // Candidates within 2 AIC units are equally supported; take the most
    // parsimonious of them (fewest parameters, then lowest p, then lowest q).
    constexpr double kAicBand = 2.0;
    bool picked = false;
    for (const auto& cand : sel.grid) {
        if (!cand.converged || cand.aic > min_aic + kAicBand) continue;
        const bool fewer = cand.p + cand.q < sel.p + sel.q;
        const bool same_count_earlier =
            cand.p + cand.q == sel.p + sel.q &&
            (cand.p < sel.p || (cand.p == sel.p && cand.q < sel.q));
        if (!picked || fewer || same_count_earlier) {
            sel.p = cand.p;
            sel.q = cand.q;
            picked = true;
        }
    }
    return sel;
}

LjungBoxResult ljung_box(const std::vector<double>& residuals, int lags, int fitted_param_count) {
    if (lags < 1) throw std::invalid_argument("ljung_box: lags must be >= 1");
    const std::size_t n = residuals.size();
    if (n <= static_cast<std::size_t>(lags)) {
        throw std::invalid_argument("ljung_box: too few residuals for " + std::to_string(lags) +
                                    " lags");
    }
    const int dof = lags - fitted_param_count;
    if (dof < 1) throw std::invalid_argument("ljung_box: lags must exceed fitted parameter count");

    const double m = stats::mean(residuals);
    double denom = 0.0;
    for (double x : residuals) denom += (x - m) * (x - m);
    if (denom == 0.0) throw ComputationError("ljung_box: residuals have zero variance");

    double q_stat = 0.0;
    for (int k = 1; k <= lags; ++k) {
        double num = 0.0;
        for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t) {
            num += (residuals[t] - m) * (residuals[t - k] - m);
        }
        const double rho = num / denom;
        q_stat += rho * rho / static_cast<double>(n - k);
    }
    q_stat *= static_cast<double>(n) * (static_cast<double>(n) + 2.0);

    LjungBoxResult result;
    result.statistic = q_stat;
    result.lags = lags;
    result.dof = dof;
    result.p_value = stats::chi_square_sf(q_stat, dof);
    return result;
}

std::vector<double> forecast(const ArimaModel& model, int horizon) {
    if (horizon < 1) throw std::invalid_argument("forecast: horizon must be >= 1");
    const std::size_t n = model.differenced.size();

    std::vector<double> w = model.differenced;
    std::vector<double> e = model.residuals;
    w.reserve(n + horizon);
    e.reserve(n + horizon);
    for (int h = 0; h < horizon; ++h) {
        const std::size_t t = w.size();
        double pred = model.constant;
        for (int j = 0; j < model.p; ++j) pred += model.ar_coeffs[j] * w[t - 1 - j];
        for (int j = 0; j < model.q && t >= static_cast<std::size_t>(j) + 1; ++j) {
            pred += model.ma_coeffs[j] * e[t - 1 - j];
        }
        w.push_back(pred);
        e.push_back(0.0);  // future shocks are zero in expectation
    }

    const std::vector<double> diff_forecasts(w.begin() + static_cast<std::ptrdiff_t>(n), w.end());
    return undifference(diff_forecasts, model.series, model.d);
}

ForecastInterval prediction_interval(double point, const std::vector<double>& recent_true,
                                     const std::vector<double>& recent_pred) {
    if (recent_true.empty() || recent_true.size() != recent_pred.size()) {
        throw std::invalid_argument("prediction_interval: misaligned or empty hindcast lists");
    }
    double len = 0.0;
    for (std::size_t i = 0; i < recent_true.size(); ++i) {
        if (recent_true[i] <= 0.0) {
            throw ComputationError("prediction_interval: zero true value at index " +
                                   std::to_string(i));
        }
        len += std::abs(recent_true[i] - recent_pred[i]) / recent_true[i];
    }
    len /= static_cast<double>(recent_true.size());

    ForecastInterval out;
    out.point = point;
    out.len = len;
    out.lower = point * (1.0 - len);
    out.upper = point * (1.0 + len);
    return out;
}

std::vector<std::pair<double, double>> sensitivity_sweep(const ArimaModel& model,
                                                         const std::vector<double>& coefficient_values,
                                                         int horizon) {
    if (model.p + model.q < 1) {
        throw std::invalid_argument("sensitivity_sweep: model has no AR or MA coefficient");
    }
    std::vector<std::pair<double, double>> out;
    out.reserve(coefficient_values.size());
    for (double value : coefficient_values) {
        ArimaModel variant = model;
        if (model.q >= 1) {
            variant.ma_coeffs[0] = value;
            if (!ma_invertible(variant.ma_coeffs)) {
                throw ComputationError("sensitivity_sweep: coefficient " + stats::fmt_g17(value) +
                                       " violates invertibility");
            }
        } else {
            variant.ar_coeffs[0] = value;
            if (!ar_stationary(variant.ar_coeffs)) {
                throw ComputationError("sensitivity_sweep: coefficient " + stats::fmt_g17(value) +
                                       " violates stationarity");
            }
        }
        out.emplace_back(value, forecast(variant, horizon).back());
    }
    return out;
}

}  // namespace wordlelab::arima

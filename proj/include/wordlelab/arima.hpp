#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace wordlelab::arima {

/// Fitted ARIMA(p,d,q) model. The forecasting equation on the d-times
/// differenced series w is
///   w_t = constant + sum_j ar[j] * w_{t-j} + sum_j ma[j] * e_{t-j} + e_t
/// Training data and conditional residuals are retained so the model can
/// forecast on its own.
struct ArimaModel {
    int p = 0;
    int d = 0;
    int q = 0;
    double constant = 0.0;
    std::vector<double> ar_coeffs;
    std::vector<double> ma_coeffs;
    double residual_variance = 0.0;

    std::vector<double> series;       // original training series
    std::vector<double> differenced;  // d-th difference of the series
    std::vector<double> residuals;    // conditional residuals, aligned with `differenced`
    double css = 0.0;                 // conditional sum of squared residuals
    std::size_t n_effective = 0;      // residuals entering the CSS (first p are conditioning zeros)

    double aic() const;
};

struct AdfResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int lags_used = 0;
};

struct ForecastInterval {
    double point = 0.0;
    double len = 0.0;  // fractional half-width (0.0318 means +-3.18%)
    double lower = 0.0;
    double upper = 0.0;
};

struct LjungBoxResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int lags = 0;
    int dof = 0;
};

/// d-th order difference; output length is input length - d.
std::vector<double> difference(const std::vector<double>& series, int d);

/// Inverse of difference: extends the original history by the given future
/// d-th-difference values and returns the original-scale continuation.
std::vector<double> undifference(const std::vector<double>& future_diffs,
                                 const std::vector<double>& history, int d);

/// Sample autocorrelation in the convention
///   acf(q) = [ (1/(n-q)) sum_{j>q} (x_j - xbar)(x_{j-q} - xbar) ]
///            / [ (1/n) sum_j (x_j - xbar)^2 ],
/// indexed 0..max_lag with acf(0) == 1.
std::vector<double> acf(const std::vector<double>& series, int max_lag);

/// Partial autocorrelations from the Durbin-Levinson recursion on acf(),
/// indexed 0..max_lag with pacf(0) == 1 and pacf(1) == acf(1).
std::vector<double> pacf(const std::vector<double>& series, int max_lag);

/// Augmented Dickey-Fuller regression with a constant and max_lag lagged
/// difference terms; the p-value uses the MacKinnon (1994) response-surface
/// approximation for the constant-only case.
AdfResult adf_test(const std::vector<double>& series, int max_lag);

/// Schwert's rule floor(12 * (n/100)^(1/4)), at least 1.
int default_adf_lag(std::size_t n);

/// MacKinnon (1994) approximate asymptotic p-value for the ADF t-statistic
/// (regression with constant, one variable).
double mackinnon_p_const(double t_statistic);

struct OrderCandidate {
    int p = 0;
    int q = 0;
    double aic = 0.0;
    bool converged = false;
};

struct OrderSelection {
    int p = 0;
    int q = 0;
    std::vector<OrderCandidate> grid;
    // Diagnostics of the differenced series, for plot export.
    std::vector<double> acf;
    std::vector<double> pacf;
};

/// AIC grid search over (p, q) in [0, max_order]^2 at the given d. All
/// candidates are scored on the sample conditioned at max_order so their
/// AICs are comparable; among candidates within 2 AIC units of the minimum
/// the most parsimonious wins.
OrderSelection select_orders(const std::vector<double>& series, int d, int max_order,
                             std::uint64_t seed);

/// Conditional-sum-of-squares fit via seeded multistart Nelder-Mead.
/// Residuals before index p are conditioning zeros. The returned model
/// satisfies stationarity (AR) and invertibility (MA): all polynomial roots
/// outside the unit circle.
ArimaModel fit_arima(const std::vector<double>& series, int p, int d, int q,
                     std::uint64_t seed = 0);

/// Ljung-Box white-noise test. Degrees of freedom are
/// lags - fitted_param_count.
LjungBoxResult ljung_box(const std::vector<double>& residuals, int lags,
                         int fitted_param_count = 0);

/// Iterated forecasts with future shocks set to zero, integrated back to the
/// original scale.
std::vector<double> forecast(const ArimaModel& model, int horizon);

/// len = mean over i of |true_i - pred_i| / true_i; the interval is
/// point * (1 -+ len).
ForecastInterval prediction_interval(double point, const std::vector<double>& recent_true,
                                     const std::vector<double>& recent_pred);

/// Replaces the leading coefficient (first MA when q >= 1, otherwise first
/// AR) with each value in turn, keeping the stored residuals, and returns
/// (coefficient, forecast at `horizon`) pairs in input order.
std::vector<std::pair<double, double>> sensitivity_sweep(const ArimaModel& model,
                                                         const std::vector<double>& coefficient_values,
                                                         int horizon);

}  // namespace wordlelab::arima

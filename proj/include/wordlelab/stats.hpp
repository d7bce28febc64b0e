#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace wordlelab::stats {

double mean(const std::vector<double>& v);
/// Variance with the given delta degrees of freedom (0 = population, 1 = sample).
double variance(const std::vector<double>& v, int ddof = 0);
double stddev(const std::vector<double>& v, int ddof = 0);
/// Median of a copy; even-length inputs average the two middle values.
double median(std::vector<double> v);

/// Pearson correlation coefficient. Throws ComputationError when either
/// series has zero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Affine map of the series onto [0, 1]. Throws ComputationError when the
/// series is constant.
std::vector<double> min_max_normalize(const std::vector<double>& v);

// ---------------------------------------------------------------------------
// Distribution tails. Incomplete gamma/beta follow the classic series /
// continued-fraction evaluations and are accurate to ~1e-13 in the ranges
// used here.
// ---------------------------------------------------------------------------

double normal_cdf(double z);
/// Regularized upper incomplete gamma Q(a, x).
double regularized_gamma_upper(double a, double x);
/// Regularized incomplete beta I_x(a, b).
double regularized_beta(double a, double b, double x);
/// P(X > x) for chi-square with dof degrees of freedom.
double chi_square_sf(double x, double dof);
/// P(X > f) for the F distribution with (dof1, dof2) degrees of freedom.
double f_sf(double f, double dof1, double dof2);

// ---------------------------------------------------------------------------
// Small dense linear algebra (normal equations, Toeplitz systems).
// ---------------------------------------------------------------------------

using Matrix = std::vector<std::vector<double>>;

/// Gaussian elimination with partial pivoting. Throws ComputationError when
/// the matrix is singular.
std::vector<double> solve_linear(Matrix a, std::vector<double> b);
/// Gauss-Jordan inverse. Throws ComputationError when singular.
Matrix invert(Matrix a);

struct OlsFit {
    std::vector<double> coefficients;
    std::vector<double> std_errors;
    std::vector<double> residuals;
    double sigma2 = 0.0;
};

/// Ordinary least squares of y on the rows of x (each row one observation).
OlsFit ols(const Matrix& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Hashing, seeding, deterministic shuffling and formatting.
// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& s);

/// Stable per-stage seed derived from the global seed and a stage name.
std::uint64_t derive_seed(std::uint64_t global_seed, const std::string& stage);

/// Fisher-Yates permutation of 0..n-1. Written out explicitly so the
/// sequence does not depend on the standard library's std::shuffle.
std::vector<std::size_t> shuffle_indices(std::size_t n, std::mt19937_64& rng);

/// Shortest text form that round-trips a double exactly ("%.17g").
std::string fmt_g17(double v);

}  // namespace wordlelab::stats

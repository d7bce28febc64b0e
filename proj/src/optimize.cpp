#include "wordlelab/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wordlelab::optimize {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                             std::vector<double> start, const NelderMeadOptions& options) {
    const std::size_t dim = start.size();
    if (dim == 0) throw std::invalid_argument("nelder_mead: empty start point");

    std::vector<std::vector<double>> simplex;
    std::vector<double> values;
    simplex.reserve(dim + 1);
    values.reserve(dim + 1);

    simplex.push_back(start);
    values.push_back(objective(start));
    for (std::size_t i = 0; i < dim; ++i) {
        auto vertex = start;
        const double step = options.initial_step * (std::abs(vertex[i]) > 1.0 ? std::abs(vertex[i]) : 1.0);
        vertex[i] += step;
        simplex.push_back(vertex);
        values.push_back(objective(vertex));
    }

    auto order = [&]() {
        std::vector<std::size_t> idx(dim + 1);
        for (std::size_t i = 0; i <= dim; ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<std::vector<double>> s2(dim + 1);
        std::vector<double> v2(dim + 1);
        for (std::size_t i = 0; i <= dim; ++i) {
            s2[i] = simplex[idx[i]];
            v2[i] = values[idx[i]];
        }
        simplex = std::move(s2);
        values = std::move(v2);
    };

    NelderMeadResult result;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        order();
        const double best = values.front();
        const double worst = values.back();
        if (std::isfinite(best) && std::isfinite(worst) &&
            std::abs(worst - best) <= options.f_tolerance * (std::abs(best) + options.f_tolerance)) {
            result.converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(dim);

        auto blend = [&](double coeff) {
            std::vector<double> p(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                p[j] = centroid[j] + coeff * (centroid[j] - simplex[dim][j]);
            }
            return p;
        };

        const auto reflected = blend(kReflect);
        const double f_reflected = objective(reflected);

        if (f_reflected < values[0]) {
            const auto expanded = blend(kExpand);
            const double f_expanded = objective(expanded);
            if (f_expanded < f_reflected) {
                simplex[dim] = expanded;
                values[dim] = f_expanded;
            } else {
                simplex[dim] = reflected;
                values[dim] = f_reflected;
            }
            continue;
        }
        if (f_reflected < values[dim - 1]) {
            simplex[dim] = reflected;
            values[dim] = f_reflected;
            continue;
        }

        const bool outside = f_reflected < values[dim];
        std::vector<double> contracted(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            const double target = outside ? reflected[j] : simplex[dim][j];
            contracted[j] = centroid[j] + kContract * (target - centroid[j]);
        }
        const double f_contracted = objective(contracted);
        if (f_contracted < std::min(f_reflected, values[dim])) {
            simplex[dim] = contracted;
            values[dim] = f_contracted;
            continue;
        }

        // Shrink toward the best vertex.
        for (std::size_t i = 1; i <= dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                simplex[i][j] = simplex[0][j] + kShrink * (simplex[i][j] - simplex[0][j]);
            }
            values[i] = objective(simplex[i]);
        }
    }

    order();
    result.x = simplex.front();
    result.value = values.front();
    result.iterations = iter;
    return result;
}

}  // namespace wordlelab::optimize

#pragma once

#include <functional>
#include <vector>

namespace wordlelab::optimize {

struct NelderMeadOptions {
    int max_iterations = 2000;
    double f_tolerance = 1e-12;
    double initial_step = 0.1;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Derivative-free downhill simplex search. The objective may return
/// +infinity to mark infeasible points; the start point must be feasible.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                             std::vector<double> start, const NelderMeadOptions& options = {});

}  // namespace wordlelab::optimize

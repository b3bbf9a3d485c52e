#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace drrisk {

struct NelderMeadOptions {
    double initial_step = 0.1;
    double f_tol = 1e-10;   // spread of simplex values
    double x_tol = 1e-9;    // simplex diameter
    std::size_t max_evaluations = 20'000;
    // Fresh simplices around the incumbent after convergence; helps on kinks
    // of nonsmooth objectives such as pointwise maxima.
    int restarts = 3;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts = {});

}  // namespace drrisk

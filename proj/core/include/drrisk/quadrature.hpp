#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace drrisk {

// Composite trapezoidal rule for samples y_0..y_{n-1} spaced h apart.
double trapezoid(std::span<const double> y, double h) noexcept;

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
};

struct SimpsonOptions {
    double abs_tol = 1e-10;
    std::size_t max_evaluations = 1'000'000;
    int max_depth = 60;
};

// Adaptive Simpson with Richardson correction. Stops refining a panel once its
// local error is below its share of abs_tol; converged is false when the
// evaluation cap or depth limit was hit anywhere.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  const SimpsonOptions& opts = {});

}  // namespace drrisk

#include "drrisk/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "drrisk/errors.hpp"

namespace drrisk {

namespace {

struct Vertex {
    std::vector<double> x;
    double f;
};

// Standard coefficients: reflection 1, expansion 2, contraction 1/2, shrink 1/2.
NelderMeadResult run_once(const Objective& f, const std::vector<double>& x0, double step,
                          const NelderMeadOptions& opts, std::size_t budget) {
    const std::size_t n = x0.size();
    std::size_t evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    simplex.push_back({x0, eval(x0)});
    for (std::size_t i = 0; i < n; ++i) {
        auto x = x0;
        x[i] += (x[i] != 0.0 ? step * std::max(1.0, std::abs(x[i])) : step);
        simplex.push_back({x, eval(x)});
    }

    auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
    bool converged = false;
    std::vector<double> centroid(n), trial(n);

    while (evals < budget) {
        std::stable_sort(simplex.begin(), simplex.end(), by_value);
        double diameter = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                diameter = std::max(diameter, std::abs(simplex[k].x[i] - simplex[0].x[i]));
            }
        }
        const double spread = simplex[n].f - simplex[0].f;
        if ((spread <= opts.f_tol || !std::isfinite(spread)) && diameter <= opts.x_tol) {
            converged = std::isfinite(simplex[0].f);
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k].x[i] / static_cast<double>(n);
        }
        auto point_at = [&](double t) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = centroid[i] + t * (simplex[n].x[i] - centroid[i]);
            return trial;
        };

        auto reflected = point_at(-1.0);
        const double fr = eval(reflected);
        if (fr < simplex[0].f) {
            auto expanded = point_at(-2.0);
            const double fe = eval(expanded);
            simplex[n] = fe < fr ? Vertex{expanded, fe} : Vertex{reflected, fr};
        } else if (fr < simplex[n - 1].f) {
            simplex[n] = {reflected, fr};
        } else {
            const bool outside = fr < simplex[n].f;
            auto contracted = point_at(outside ? -0.5 : 0.5);
            const double fc = eval(contracted);
            if (fc < std::min(fr, simplex[n].f)) {
                simplex[n] = {contracted, fc};
            } else {
                for (std::size_t k = 1; k <= n; ++k) {
                    for (std::size_t i = 0; i < n; ++i) {
                        simplex[k].x[i] = simplex[0].x[i] + 0.5 * (simplex[k].x[i] - simplex[0].x[i]);
                    }
                    simplex[k].f = eval(simplex[k].x);
                }
            }
        }
    }
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    return {simplex[0].x, simplex[0].f, evals, converged};
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts) {
    if (x0.empty()) throw InvalidArgument("nelder_mead: empty starting point");
    NelderMeadResult best = run_once(f, x0, opts.initial_step, opts, opts.max_evaluations);
    std::size_t used = best.evaluations;
    double step = opts.initial_step;
    for (int r = 0; r < opts.restarts && used < opts.max_evaluations; ++r) {
        step *= 0.1;
        auto next = run_once(f, best.x, std::max(step, 1e3 * opts.x_tol), opts, opts.max_evaluations - used);
        used += next.evaluations;
        const bool improved = next.value < best.value - opts.f_tol;
        if (next.value <= best.value) {
            best.x = std::move(next.x);
            best.value = next.value;
            best.converged = next.converged;
        }
        if (!improved) break;
    }
    best.evaluations = used;
    return best;
}

}  // namespace drrisk

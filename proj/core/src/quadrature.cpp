#include "drrisk/quadrature.hpp"

#include <cmath>

#include "drrisk/errors.hpp"

namespace drrisk {

double trapezoid(std::span<const double> y, double h) noexcept {
    if (y.size() < 2) return 0.0;
    double inner = 0.0;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) inner += y[i];
    return h * (0.5 * (y.front() + y.back()) + inner);
}

namespace {

struct SimpsonState {
    const std::function<double(double)>& f;
    const SimpsonOptions& opts;
    std::size_t evaluations = 0;
    bool converged = true;
    double error = 0.0;

    double eval(double x) {
        ++evaluations;
        return f(x);
    }

    double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = eval(lm);
        const double frm = eval(rm);
        const double h = b - a;
        const double left = h / 12.0 * (fa + 4.0 * flm + fm);
        const double right = h / 12.0 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;
        if (std::abs(delta) <= 15.0 * tol) {
            error += std::abs(delta) / 15.0;
            return left + right + delta / 15.0;
        }
        if (depth <= 0 || evaluations >= opts.max_evaluations) {
            converged = false;
            error += std::abs(delta) / 15.0;
            return left + right + delta / 15.0;
        }
        return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
               recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
};

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  const SimpsonOptions& opts) {
    if (!(opts.abs_tol > 0.0)) throw InvalidArgument("adaptive_simpson: tolerance must be > 0");
    if (a == b) return {};
    SimpsonState st{f, opts};
    // Seed with 16 panels so narrow features are not skipped by the first estimate.
    constexpr int kPanels = 16;
    const double h = (b - a) / kPanels;
    double total = 0.0;
    double fa = st.eval(a);
    for (int i = 0; i < kPanels; ++i) {
        const double lo = a + h * i;
        const double hi = (i + 1 == kPanels) ? b : a + h * (i + 1);
        const double mid = 0.5 * (lo + hi);
        const double fm = st.eval(mid);
        const double fb = st.eval(hi);
        const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += st.recurse(lo, hi, fa, fm, fb, whole, opts.abs_tol / kPanels, opts.max_depth);
        fa = fb;
    }
    return {total, st.error, st.evaluations, st.converged};
}

}  // namespace drrisk

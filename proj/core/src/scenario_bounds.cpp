#include "drrisk/scenario_bounds.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/beta.hpp>

#include "drrisk/errors.hpp"

namespace drrisk {

namespace {

double log_choose(std::size_t n, std::size_t k) {
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    return std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0);
}

void check_unit(double eps, const char* what) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidArgument(std::string(what) + ": eps must lie in [0, 1]");
}

void check_m(double m) {
    if (!(m >= 1.0) || !std::isfinite(m)) throw InvalidArgument("RVD radius must be finite and >= 1");
}

}  // namespace

ScenarioParams::ScenarioParams(std::size_t n_samples, std::size_t support_dim) : n(n_samples), d(support_dim) {
    if (n < 1) throw InvalidArgument("ScenarioParams: N must be >= 1");
    if (d < 1 || d > n) throw InvalidArgument("ScenarioParams: need 1 <= d <= N");
}

double binom_pmf(std::size_t n, std::size_t l, double alpha) {
    if (l > n) throw InvalidArgument("binom_pmf: l must be <= N");
    check_unit(alpha, "binom_pmf");
    if (alpha == 0.0) return l == 0 ? 1.0 : 0.0;
    if (alpha == 1.0) return l == n ? 1.0 : 0.0;
    const double lp = log_choose(n, l) + static_cast<double>(l) * std::log(alpha) +
                      static_cast<double>(n - l) * std::log1p(-alpha);
    return std::min(1.0, std::exp(lp));
}

double two_level_nominal(const ScenarioParams& p, double eps) {
    check_unit(eps, "two_level_nominal");
    double total = 0.0;
    for (std::size_t i = 0; i < p.d; ++i) total += binom_pmf(p.n, i, eps);
    return std::clamp(total, 0.0, 1.0);
}

double two_level_nominal_ibeta(const ScenarioParams& p, double eps) {
    check_unit(eps, "two_level_nominal_ibeta");
    if (eps == 0.0) return 1.0;
    if (eps == 1.0) return 0.0;
    return boost::math::ibeta(static_cast<double>(p.n - p.d + 1), static_cast<double>(p.d), 1.0 - eps);
}

double two_level_dr(const ScenarioParams& p, DiscrepancyKind kind, double radius, double eps, const PrlOptions& opts) {
    check_unit(eps, "two_level_dr");
    return two_level_nominal(p, prl(kind, radius, eps, opts).eps_hat);
}

double beta_density_nominal(const ScenarioParams& p, double eps) {
    check_unit(eps, "beta_density_nominal");
    const double d = static_cast<double>(p.d);
    const double rest = static_cast<double>(p.n - p.d);
    if (eps == 0.0) return p.d == 1 ? rest + 1.0 : 0.0;
    if (eps == 1.0) return p.d == p.n ? d : 0.0;
    const double lv = std::log(d) + log_choose(p.n, p.d) + (d - 1.0) * std::log(eps) + rest * std::log1p(-eps);
    return std::exp(lv);
}

double dr_density_rvd(const ScenarioParams& p, double m, double eps) {
    check_m(m);
    check_unit(eps, "dr_density_rvd");
    return beta_density_nominal(p, eps / m) / m;
}

double expected_nominal(const ScenarioParams& p) {
    return static_cast<double>(p.d) / static_cast<double>(p.n + 1);
}

double expected_dr_rvd(const ScenarioParams& p, double m) {
    check_m(m);
    const double a = 1.0 / m;
    double head = 0.0;
    for (std::size_t i = 0; i < p.d; ++i) head += binom_pmf(p.n, i, a);
    double tail = 0.0;
    const double d = static_cast<double>(p.d);
    for (std::size_t i = p.d; i <= p.n; ++i) tail += binom_pmf(p.n, i, a) * d / static_cast<double>(i + 1);
    return std::min(1.0, head + tail);
}

double expected_dr_numeric(const ScenarioParams& p, DiscrepancyKind kind, double radius,
                           const ExpectedBoundOptions& opts) {
    validate_radius(kind, radius);
    auto integrand = [&](double eps) { return two_level_dr(p, kind, radius, eps, opts.prl); };

    // Largest eps with a zero perturbed level; the integrand is 1 below it.
    double split = 0.0;
    if (prl(kind, radius, 1.0, opts.prl).eps_hat == 0.0) {
        split = 1.0;
    } else if (prl(kind, radius, 1e-300, opts.prl).eps_hat == 0.0) {
        double lo = 0.0;
        double hi = 1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            (prl(kind, radius, mid, opts.prl).eps_hat == 0.0 ? lo : hi) = mid;
        }
        split = lo;
    }
    double total = split;
    if (split < 1.0) {
        // RVD has a second kink where eps / M reaches 1; it only lies inside for M = 1.
        const auto r = adaptive_simpson(integrand, split, 1.0, opts.quadrature);
        if (!r.converged) throw DomainError("expected_dr_numeric: quadrature did not converge");
        total += r.value;
    }
    return std::clamp(total, 0.0, 1.0);
}

double expected_dr_rvd_by_parts(const ScenarioParams& p, double m, const SimpsonOptions& opts) {
    check_m(m);
    const double boundary = two_level_nominal(p, 1.0 / m);
    const auto r = adaptive_simpson([&](double eps) { return eps * dr_density_rvd(p, m, eps); }, 0.0, 1.0, opts);
    if (!r.converged) throw DomainError("expected_dr_rvd_by_parts: quadrature did not converge");
    return boundary + r.value;
}

double dkw_band(double confidence, std::size_t n) {
    if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidArgument("dkw_band: confidence must lie in (0, 1)");
    if (n == 0) throw InvalidArgument("dkw_band: n must be >= 1");
    return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(n)));
}

}  // namespace drrisk

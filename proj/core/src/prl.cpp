#include "drrisk/prl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "drrisk/errors.hpp"
#include "drrisk/parallel.hpp"

namespace drrisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_probability(double x, const char* what) {
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument(std::string(what) + " must lie in [0, 1]");
}

// x log(x / y) with 0 log 0 = 0.
double xlogxy(double x, double y) {
    if (x == 0.0) return 0.0;
    if (y == 0.0) return kInf;
    return x * std::log(x / y);
}

double event_mass(std::span<const double> w, unsigned mask) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (mask & (1u << j)) s += w[j];
    }
    return s;
}

void simplex_grid_rec(std::size_t k, std::size_t left, std::size_t m, std::vector<double>& cur,
                      std::vector<std::vector<double>>& out) {
    if (cur.size() + 1 == k) {
        cur.push_back(static_cast<double>(left) / static_cast<double>(m));
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (std::size_t i = 0; i <= left; ++i) {
        cur.push_back(static_cast<double>(i) / static_cast<double>(m));
        simplex_grid_rec(k, left - i, m, cur, out);
        cur.pop_back();
    }
}

const DiscreteDist& discrete_nominal(const AmbiguitySet& set) {
    const auto* dd = std::get_if<DiscreteDist>(&set.nominal());
    if (dd == nullptr) throw InvalidArgument("brute-force PRL checks need a DiscreteDist nominal");
    if (dd->size() < 2 || dd->size() > 4) throw InvalidArgument("brute-force PRL checks support 2 to 4 atoms");
    return *dd;
}

bool within_radius(double rho, double radius) { return rho <= radius * (1.0 + 1e-12) + 1e-15; }

}  // namespace

AmbiguitySet::AmbiguitySet(DiscrepancyKind kind, double radius, Distribution nominal)
    : kind_(kind), radius_(radius), nominal_(std::move(nominal)) {
    validate_radius(kind, radius);
}

void validate_radius(DiscrepancyKind kind, double radius) {
    if (std::isnan(radius)) throw InvalidArgument("radius must be a number");
    if (kind == DiscrepancyKind::Rvd) {
        if (!(radius >= 1.0)) throw InvalidArgument("RVD radius must be >= 1");
    } else if (!(radius >= 0.0)) {
        throw InvalidArgument("radius must be >= 0");
    }
}

double binary_divergence(DiscrepancyKind kind, double beta, double alpha, const DivergenceOptions& opts) {
    require_probability(beta, "beta");
    require_probability(alpha, "alpha");
    switch (kind) {
        case DiscrepancyKind::Rvd: {
            double r = 0.0;
            if (beta > 0.0) r = std::max(r, alpha > 0.0 ? beta / alpha : kInf);
            if (beta < 1.0) r = std::max(r, alpha < 1.0 ? (1.0 - beta) / (1.0 - alpha) : kInf);
            return r;
        }
        case DiscrepancyKind::KullbackLeibler:
            return std::max(0.0, xlogxy(beta, alpha) + xlogxy(1.0 - beta, 1.0 - alpha));
        case DiscrepancyKind::Hellinger:
            return std::sqrt(std::max(0.0, 1.0 - std::sqrt(alpha * beta) - std::sqrt((1.0 - alpha) * (1.0 - beta))));
        case DiscrepancyKind::ChiSquared: {
            if (beta == alpha) return 0.0;
            const double ref = opts.chi_weight == ChiSquaredWeight::Nominal ? alpha : beta;
            const double var = ref * (1.0 - ref);
            return var > 0.0 ? (beta - alpha) * (beta - alpha) / var : kInf;
        }
        case DiscrepancyKind::TotalVariation: return std::abs(beta - alpha);
    }
    return kInf;
}

double worst_case_prob(DiscrepancyKind kind, double radius, double alpha, const PrlOptions& opts) {
    validate_radius(kind, radius);
    require_probability(alpha, "alpha");
    if (alpha == 1.0) return 1.0;
    if (kind == DiscrepancyKind::Rvd) return std::min(radius * alpha, 1.0);
    if (kind == DiscrepancyKind::TotalVariation) return std::min(alpha + radius, 1.0);
    if (radius == 0.0) return alpha;
    if (binary_divergence(kind, 1.0, alpha, opts.divergence) <= radius) return 1.0;

    // d(., alpha) is zero at alpha and increasing on [alpha, 1].
    double lo = alpha;
    double hi = 1.0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (binary_divergence(kind, mid, alpha, opts.divergence) <= radius) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

PrlResult prl(DiscrepancyKind kind, double radius, double eps, const PrlOptions& opts) {
    validate_radius(kind, radius);
    require_probability(eps, "eps");
    PrlResult out{eps, 0.0, kind, radius};
    if (eps == 0.0) return out;
    if (kind == DiscrepancyKind::Rvd) {
        out.eps_hat = eps / radius;
        return out;
    }
    if (worst_case_prob(kind, radius, eps, opts) <= eps) {
        out.eps_hat = eps;
        return out;
    }
    if (worst_case_prob(kind, radius, 0.0, opts) > eps) return out;

    const double tol = opts.tolerance * std::min(1.0, eps);
    double lo = 0.0;
    double hi = eps;
    for (int it = 0; it < opts.max_iterations && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (worst_case_prob(kind, radius, mid, opts) <= eps) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    out.eps_hat = lo;
    return out;
}

std::vector<PrlResult> prl_curve(DiscrepancyKind kind, double radius, std::span<const double> eps_grid,
                                 const PrlOptions& opts) {
    validate_radius(kind, radius);
    for (double e : eps_grid) {
        if (!(e > 0.0 && e <= 1.0)) throw InvalidArgument("prl_curve: grid values must lie in (0, 1]");
    }
    std::vector<PrlResult> out(eps_grid.size());
    parallel_for(eps_grid.size(), [&](std::size_t i) { out[i] = prl(kind, radius, eps_grid[i], opts); });
    return out;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0 && hi > lo)) throw InvalidArgument("log_spaced: need 0 < lo < hi");
    if (n < 2) throw InvalidArgument("log_spaced: need n >= 2");
    std::vector<double> out(n);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<std::vector<double>> simplex_grid(std::size_t k, std::size_t m) {
    if (k == 0 || m == 0) throw InvalidArgument("simplex_grid: need k >= 1 and m >= 1");
    std::vector<std::vector<double>> out;
    std::vector<double> cur;
    simplex_grid_rec(k, m, m, cur, out);
    return out;
}

double prl_bruteforce_oracle(const AmbiguitySet& set, double eps, const OracleOptions& opts) {
    const DiscreteDist& nominal = discrete_nominal(set);
    require_probability(eps, "eps");
    if (!(opts.resolution > 0.0 && opts.resolution <= 1.0)) throw InvalidArgument("oracle resolution must be in (0, 1]");
    if (eps >= 1.0) return 1.0;

    const std::size_t k = nominal.size();
    const std::size_t free = k - 1;
    const std::size_t m0 = opts.coarse_divisions != 0 ? opts.coarse_divisions : (k <= 3 ? 24 : 12);
    const auto grid = simplex_grid(k, m0);
    const unsigned n_events = (1u << k) - 1;  // nonempty events; the full set always violates

    // Infimum of Phat(E) over violating candidates, per event.
    std::vector<double> best(n_events + 1, kInf);
    std::vector<std::pair<std::size_t, std::size_t>> best_pair(n_events + 1, {0, 0});
    // The full event: Phat = P = 1 > eps for any pair.
    double infimum = 1.0;

    for (std::size_t a = 0; a < grid.size(); ++a) {
        const auto& phat = grid[a];
        for (std::size_t b = 0; b < grid.size(); ++b) {
            const auto& p = grid[b];
            const double rho = divergence_discrete(set.kind(), p, phat, opts.divergence);
            if (!within_radius(rho, set.radius())) continue;
            for (unsigned mask = 1; mask < n_events; ++mask) {
                if (event_mass(p, mask) < eps) continue;
                const double obj = event_mass(phat, mask);
                if (obj < best[mask]) {
                    best[mask] = obj;
                    best_pair[mask] = {a, b};
                }
            }
        }
    }

    // Shrinking full-stencil refinement in the 2(k-1) free coordinates.
    const std::size_t dims = 2 * free;
    std::size_t stencil_size = 1;
    for (std::size_t d = 0; d < dims; ++d) stencil_size *= 5;
    std::vector<double> phat(k), p(k), z(dims), cand(dims);

    auto evaluate = [&](std::span<const double> coords, unsigned mask) {
        double sh = 0.0;
        double sp = 0.0;
        for (std::size_t j = 0; j < free; ++j) {
            phat[j] = coords[j];
            p[j] = coords[free + j];
            if (phat[j] < 0.0 || p[j] < 0.0) return kInf;
            sh += phat[j];
            sp += p[j];
        }
        phat[free] = 1.0 - sh;
        p[free] = 1.0 - sp;
        if (phat[free] < -1e-15 || p[free] < -1e-15) return kInf;
        phat[free] = std::max(0.0, phat[free]);
        p[free] = std::max(0.0, p[free]);
        if (event_mass(p, mask) < eps) return kInf;
        if (!within_radius(divergence_discrete(set.kind(), p, phat, opts.divergence), set.radius())) return kInf;
        return event_mass(phat, mask);
    };

    for (unsigned mask = 1; mask < n_events; ++mask) {
        if (best[mask] == kInf) continue;
        for (std::size_t j = 0; j < free; ++j) {
            z[j] = grid[best_pair[mask].first][j];
            z[free + j] = grid[best_pair[mask].second][j];
        }
        double value = best[mask];
        double h = 1.0 / static_cast<double>(m0);
        while (h > opts.search_tolerance) {
            bool moved = false;
            for (int repeat = 0; repeat < 64; ++repeat) {
                double local = value;
                std::vector<double> arg = z;
                for (std::size_t s = 0; s < stencil_size; ++s) {
                    std::size_t code = s;
                    for (std::size_t d = 0; d < dims; ++d) {
                        const int offset = static_cast<int>(code % 5) - 2;
                        code /= 5;
                        cand[d] = z[d] + 0.5 * h * offset;
                    }
                    const double v = evaluate(cand, mask);
                    if (v < local) {
                        local = v;
                        arg = cand;
                    }
                }
                if (local < value) {
                    value = local;
                    z = arg;
                    moved = true;
                } else {
                    break;
                }
            }
            if (!moved) h *= 0.5;
        }
        best[mask] = value;
        infimum = std::min(infimum, value);
    }

    const double steps = std::floor((infimum + 1e-9) / opts.resolution);
    return std::clamp(steps * opts.resolution, 0.0, 1.0);
}

SoundnessReport prl_soundness_check(const AmbiguitySet& set, double eps, double eps_hat, std::size_t divisions,
                                    const DivergenceOptions& opts) {
    const DiscreteDist& nominal = discrete_nominal(set);
    require_probability(eps, "eps");
    require_probability(eps_hat, "eps_hat");
    const std::size_t k = nominal.size();
    const auto& phat = nominal.weights();
    SoundnessReport report;
    std::vector<unsigned> events;
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
        if (event_mass(phat, mask) <= eps_hat) events.push_back(mask);
    }
    report.events_checked = events.size();
    for (const auto& p : simplex_grid(k, divisions)) {
        if (!within_radius(divergence_discrete(set.kind(), p, phat, opts), set.radius())) continue;
        ++report.members_in_ball;
        for (unsigned mask : events) {
            const double excess = event_mass(p, mask) - eps;
            report.max_excess = std::max(report.max_excess, excess);
            if (excess > 1e-12) ++report.violations;
        }
    }
    return report;
}

}  // namespace drrisk

#include "drrisk/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "drrisk/errors.hpp"

namespace drrisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_discrete(const Distribution& d) { return std::holds_alternative<DiscreteDist>(d); }

void require_grids(const Distribution& p, const Distribution& phat, std::span<const Grid1> grids) {
    if (is_discrete(p) || is_discrete(phat)) {
        throw Unsupported("grid integration is not defined for discrete distributions; use divergence_discrete");
    }
    if (dimension(p) != dimension(phat)) throw DimensionMismatch("P and Phat differ in dimension");
    if (grids.size() != dimension(p)) throw DimensionMismatch("need one grid per dimension");
}

// Visits every point of the tensor grid; body(point, trapezoid weight).
template <typename Body>
void for_each_grid_point(std::span<const Grid1> grids, Body&& body) {
    const std::size_t dims = grids.size();
    std::vector<std::size_t> idx(dims, 0);
    std::vector<double> x(dims);
    for (;;) {
        double w = 1.0;
        for (std::size_t d = 0; d < dims; ++d) {
            x[d] = grids[d].at(idx[d]);
            const bool edge = idx[d] == 0 || idx[d] + 1 == grids[d].n;
            w *= grids[d].step() * (edge ? 0.5 : 1.0);
        }
        body(std::span<const double>(x), w);
        std::size_t d = 0;
        while (d < dims && ++idx[d] == grids[d].n) idx[d++] = 0;
        if (d == dims) return;
    }
}

// Contribution of one grid point to the divergence integral, before the final
// square root for Hellinger. Both arguments are log-densities.
double integrand(DiscrepancyKind kind, double lf, double lg, ChiSquaredWeight chi) {
    const bool has_p = lf > -kInf;
    const bool has_phat = lg > -kInf;
    if (!has_p && !has_phat) return 0.0;
    if (has_p && !has_phat) throw SupportViolation("f_P > 0 at a point where f_Phat = 0");
    const double g = std::exp(lg);
    if (!has_p) {
        switch (kind) {
            case DiscrepancyKind::TotalVariation:
            case DiscrepancyKind::Hellinger: return 0.5 * g;
            case DiscrepancyKind::KullbackLeibler: return 0.0;
            case DiscrepancyKind::ChiSquared: return chi == ChiSquaredWeight::Nominal ? g : kInf;
            case DiscrepancyKind::Rvd: return 0.0;
        }
    }
    const double f = std::exp(lf);
    switch (kind) {
        case DiscrepancyKind::TotalVariation: return 0.5 * std::abs(f - g);
        case DiscrepancyKind::KullbackLeibler: return f * (lf - lg);
        case DiscrepancyKind::Hellinger: {
            const double diff = std::sqrt(f) - std::sqrt(g);
            return 0.5 * diff * diff;
        }
        case DiscrepancyKind::ChiSquared: {
            if (chi == ChiSquaredWeight::Nominal) {
                const double r = std::expm1(lf - lg);
                return g * r * r;
            }
            const double r = std::expm1(lg - lf);
            return f * r * r;
        }
        case DiscrepancyKind::Rvd: break;
    }
    throw Unsupported("RVD has no integral form");
}

double finish(DiscrepancyKind kind, double total) {
    if (kind == DiscrepancyKind::Hellinger) return std::sqrt(std::max(0.0, total));
    // Rounding can push identical-density integrals a hair below zero.
    return std::max(0.0, total);
}

double golden_max(const std::function<double(double)>& f, double a, double b, double& best_x) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if (fc >= fd) {
        best_x = c;
        return fc;
    }
    best_x = d;
    return fd;
}

}  // namespace

std::string_view to_string(DiscrepancyKind kind) noexcept {
    switch (kind) {
        case DiscrepancyKind::Rvd: return "rvd";
        case DiscrepancyKind::KullbackLeibler: return "kl";
        case DiscrepancyKind::Hellinger: return "hellinger";
        case DiscrepancyKind::ChiSquared: return "chi2";
        case DiscrepancyKind::TotalVariation: return "tv";
    }
    return "unknown";
}

std::string_view display_name(DiscrepancyKind kind) noexcept {
    switch (kind) {
        case DiscrepancyKind::Rvd: return "RVD";
        case DiscrepancyKind::KullbackLeibler: return "Kullback-Leibler";
        case DiscrepancyKind::Hellinger: return "Hellinger";
        case DiscrepancyKind::ChiSquared: return "chi-squared";
        case DiscrepancyKind::TotalVariation: return "Total variation";
    }
    return "unknown";
}

DiscrepancyKind parse_discrepancy_kind(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "rvd" || s == "relative-variation") return DiscrepancyKind::Rvd;
    if (s == "kl" || s == "kullback-leibler" || s == "kullbackleibler") return DiscrepancyKind::KullbackLeibler;
    if (s == "hellinger") return DiscrepancyKind::Hellinger;
    if (s == "chi2" || s == "chisquared" || s == "chi-squared") return DiscrepancyKind::ChiSquared;
    if (s == "tv" || s == "total-variation" || s == "totalvariation") return DiscrepancyKind::TotalVariation;
    throw InvalidArgument("unknown discrepancy kind '" + std::string(text) + "'");
}

std::string_view to_string(ChiSquaredWeight w) noexcept {
    return w == ChiSquaredWeight::Nominal ? "nominal" : "member";
}

ChiSquaredWeight parse_chi_squared_weight(std::string_view text) {
    if (text == "nominal") return ChiSquaredWeight::Nominal;
    if (text == "member") return ChiSquaredWeight::Member;
    throw InvalidArgument("unknown chi-squared weight '" + std::string(text) + "' (nominal|member)");
}

Grid1::Grid1(double lo_, double hi_, std::size_t n_) : lo(lo_), hi(hi_), n(n_) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) throw InvalidArgument("Grid1: need finite lo < hi");
    if (n < 2) throw InvalidArgument("Grid1: need at least 2 points");
}

std::vector<Grid1> default_grids(const Distribution& p, const Distribution& phat, std::size_t n) {
    if (dimension(p) != dimension(phat)) throw DimensionMismatch("P and Phat differ in dimension");
    const std::size_t dims = dimension(p);
    if (n == 0) n = dims == 1 ? 20001 : 1001;
    const Box a = bounding_box(p);
    const Box b = bounding_box(phat);
    std::vector<Grid1> grids;
    for (std::size_t d = 0; d < dims; ++d) {
        grids.emplace_back(std::min(a.lo[d], b.lo[d]), std::max(a.hi[d], b.hi[d]), n);
    }
    return grids;
}

double rvd_gaussian_nd(const GaussianNd& p, const GaussianNd& phat) {
    if (p.dim() != phat.dim()) throw DimensionMismatch("rvd_gaussian_nd: dimensions differ");
    if (p.mean() == phat.mean() && p.covariance() == phat.covariance()) return 1.0;

    const Eigen::MatrixXd gap = p.precision() - phat.precision();
    const Eigen::MatrixXd sym = 0.5 * (gap + gap.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    const double scale = std::max(p.precision().cwiseAbs().maxCoeff(), phat.precision().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() <= 1e-12 * scale) {
        throw DominanceViolation(
            "Sigma^{-1} - Sigma_hat^{-1} is not positive definite: the density ratio is unbounded");
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(sym);
    const Eigen::VectorXd rhs = p.precision() * p.mean() - phat.precision() * phat.mean();
    const Eigen::VectorXd peak = llt.solve(rhs);
    const Eigen::VectorXd dp = peak - p.mean();
    const Eigen::VectorXd dh = peak - phat.mean();
    const double quad = dp.dot(p.precision() * dp) - dh.dot(phat.precision() * dh);
    return std::exp(0.5 * (phat.log_det() - p.log_det()) - 0.5 * quad);
}

double rvd_gaussian_1d(const Gaussian1& p, const Gaussian1& phat) {
    if (p == phat) return 1.0;
    if (!(phat.sigma() > p.sigma())) {
        throw DominanceViolation("sigma_hat must exceed sigma for a finite RVD between distinct Gaussians");
    }
    const double dm = phat.mu() - p.mu();
    const double s2 = phat.sigma() * phat.sigma() - p.sigma() * p.sigma();
    return phat.sigma() / p.sigma() * std::exp(0.5 * dm * dm / s2);
}

double rvd_numeric(const Distribution& p, const Distribution& phat, std::span<const Grid1> grids) {
    require_grids(p, phat, grids);
    double best = -kInf;
    std::vector<double> best_x(grids.size());
    for_each_grid_point(grids, [&](std::span<const double> x, double) {
        const double lf = log_density(p, x);
        const double lg = log_density(phat, x);
        if (lf == -kInf) return;
        if (lg == -kInf) throw SupportViolation("f_P > 0 at a point where f_Phat = 0");
        if (lf - lg > best) {
            best = lf - lg;
            std::copy(x.begin(), x.end(), best_x.begin());
        }
    });
    if (best == -kInf) throw InvalidArgument("rvd_numeric: grid does not intersect the support of P");

    auto log_ratio = [&](std::span<const double> x) {
        const double lf = log_density(p, x);
        const double lg = log_density(phat, x);
        if (lf == -kInf || lg == -kInf) return -kInf;
        return lf - lg;
    };
    std::vector<double> x = best_x;
    for (int sweep = 0; sweep < 200; ++sweep) {
        const double before = best;
        for (std::size_t d = 0; d < grids.size(); ++d) {
            const double h = grids[d].step();
            const double centre = x[d];
            double arg = centre;
            const double value = golden_max(
                [&](double t) {
                    x[d] = t;
                    return log_ratio(x);
                },
                centre - h, centre + h, arg);
            if (value > best) {
                best = value;
                x[d] = arg;
            } else {
                x[d] = centre;
            }
        }
        if (best - before <= 1e-15 * (1.0 + std::abs(best))) break;
    }
    return std::exp(best);
}

double divergence_gaussian_1d(DiscrepancyKind kind, const Gaussian1& p, const Gaussian1& phat) {
    const double dm = p.mu() - phat.mu();
    const double s = p.sigma();
    const double sh = phat.sigma();
    switch (kind) {
        case DiscrepancyKind::Rvd: return rvd_gaussian_1d(p, phat);
        case DiscrepancyKind::KullbackLeibler:
            return std::max(0.0, std::log(sh / s) + (s * s + dm * dm) / (2.0 * sh * sh) - 0.5);
        case DiscrepancyKind::Hellinger: {
            const double v = s * s + sh * sh;
            const double bc = std::sqrt(2.0 * s * sh / v) * std::exp(-0.25 * dm * dm / v);
            return std::sqrt(std::max(0.0, 1.0 - bc));
        }
        case DiscrepancyKind::ChiSquared:
        case DiscrepancyKind::TotalVariation: break;
    }
    throw Unsupported(std::string("no closed form for ") + std::string(display_name(kind)) +
                      "; use divergence_numeric");
}

double divergence_numeric(DiscrepancyKind kind, const Distribution& p, const Distribution& phat,
                          std::span<const Grid1> grids, const DivergenceOptions& opts) {
    if (kind == DiscrepancyKind::Rvd) return rvd_numeric(p, phat, grids);
    require_grids(p, phat, grids);
    double total = 0.0;
    for_each_grid_point(grids, [&](std::span<const double> x, double w) {
        total += w * integrand(kind, log_density(p, x), log_density(phat, x), opts.chi_weight);
    });
    return finish(kind, total);
}

double divergence_from_log_densities(DiscrepancyKind kind, std::span<const double> log_p,
                                     std::span<const double> log_phat, double h, const DivergenceOptions& opts) {
    if (log_p.size() != log_phat.size()) throw DimensionMismatch("log-density arrays differ in length");
    if (log_p.size() < 2) throw InvalidArgument("need at least 2 grid points");
    if (kind == DiscrepancyKind::Rvd) {
        double best = -kInf;
        for (std::size_t i = 0; i < log_p.size(); ++i) {
            if (log_p[i] == -kInf) continue;
            if (log_phat[i] == -kInf) throw SupportViolation("f_P > 0 at a point where f_Phat = 0");
            best = std::max(best, log_p[i] - log_phat[i]);
        }
        return std::exp(best);
    }
    double total = 0.0;
    const std::size_t n = log_p.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i + 1 == n) ? 0.5 * h : h;
        total += w * integrand(kind, log_p[i], log_phat[i], opts.chi_weight);
    }
    return finish(kind, total);
}

double divergence_discrete(DiscrepancyKind kind, std::span<const double> p, std::span<const double> phat,
                           const DivergenceOptions& opts) {
    if (p.size() != phat.size()) throw DimensionMismatch("weight vectors differ in length");
    double acc = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double a = p[j];
        const double b = phat[j];
        switch (kind) {
            case DiscrepancyKind::Rvd:
                if (a > 0.0) acc = std::max(acc, b > 0.0 ? a / b : kInf);
                break;
            case DiscrepancyKind::KullbackLeibler:
                if (a > 0.0) acc += b > 0.0 ? a * std::log(a / b) : kInf;
                break;
            case DiscrepancyKind::Hellinger: {
                const double diff = std::sqrt(a) - std::sqrt(b);
                acc += 0.5 * diff * diff;
                break;
            }
            case DiscrepancyKind::ChiSquared: {
                const double ref = opts.chi_weight == ChiSquaredWeight::Nominal ? b : a;
                if (ref > 0.0) {
                    acc += (a - b) * (a - b) / ref;
                } else if (a != b) {
                    acc += kInf;
                }
                break;
            }
            case DiscrepancyKind::TotalVariation: acc += 0.5 * std::abs(a - b); break;
        }
    }
    if (kind == DiscrepancyKind::Hellinger) return std::sqrt(acc);
    return std::max(0.0, acc);
}

}  // namespace drrisk

#include "drrisk/nominal_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "drrisk/errors.hpp"
#include "drrisk/nelder_mead.hpp"
#include "drrisk/parallel.hpp"

namespace drrisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 1) return {lo};
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

// Evaluates rho(member_i, nominal) for every member. Kinds without a closed
// form integrate on one fixed grid whose member densities are computed once.
class FamilyDistances {
public:
    FamilyDistances(DiscrepancyKind kind, const GaussianFamily& family, const FitOptions& opts)
        : kind_(kind), family_(family), opts_(opts) {
        if (family.members.empty()) throw InvalidArgument("GaussianFamily must be non-empty");
        mu_min_ = mu_max_ = family.members.front().mu();
        sigma_min_ = sigma_max_ = family.members.front().sigma();
        for (const auto& m : family.members) {
            mu_min_ = std::min(mu_min_, m.mu());
            mu_max_ = std::max(mu_max_, m.mu());
            sigma_min_ = std::min(sigma_min_, m.sigma());
            sigma_max_ = std::max(sigma_max_, m.sigma());
        }
        if (kind == DiscrepancyKind::ChiSquared || kind == DiscrepancyKind::TotalVariation) build_grid();
    }

    double mu_min() const { return mu_min_; }
    double mu_max() const { return mu_max_; }
    double sigma_min() const { return sigma_min_; }
    double sigma_max() const { return sigma_max_; }

    void all(double mu_hat, double sigma_hat, std::vector<double>& out) const {
        out.resize(family_.members.size());
        if (kind_ == DiscrepancyKind::ChiSquared || kind_ == DiscrepancyKind::TotalVariation) {
            numeric(mu_hat, sigma_hat, out);
            return;
        }
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = closed_form(family_.members[i], mu_hat, sigma_hat);
    }

    double worst(double mu_hat, double sigma_hat) const {
        thread_local std::vector<double> buf;
        all(mu_hat, sigma_hat, buf);
        return *std::max_element(buf.begin(), buf.end());
    }

private:
    double closed_form(const Gaussian1& m, double mu_hat, double sigma_hat) const {
        const double dm = m.mu() - mu_hat;
        const double s = m.sigma();
        switch (kind_) {
            case DiscrepancyKind::Rvd:
                if (sigma_hat > s) return sigma_hat / s * std::exp(0.5 * dm * dm / (sigma_hat * sigma_hat - s * s));
                return (sigma_hat == s && dm == 0.0) ? 1.0 : kInf;
            case DiscrepancyKind::KullbackLeibler:
                return std::max(0.0, std::log(sigma_hat / s) + (s * s + dm * dm) / (2.0 * sigma_hat * sigma_hat) - 0.5);
            case DiscrepancyKind::Hellinger: {
                const double v = s * s + sigma_hat * sigma_hat;
                const double bc = std::sqrt(2.0 * s * sigma_hat / v) * std::exp(-0.25 * dm * dm / v);
                return std::sqrt(std::max(0.0, 1.0 - bc));
            }
            default: return kInf;
        }
    }

    void build_grid() {
        // Wide enough for nominals up to twice the largest member sigma.
        const double reach = opts_.tail_sigmas * 2.0 * sigma_max_;
        lo_ = mu_min_ - reach;
        h_ = (mu_max_ - mu_min_ + 2.0 * reach) / static_cast<double>(opts_.grid_points - 1);
        const std::size_t n = opts_.grid_points;
        f_.assign(family_.members.size() * n, 0.0);
        for (std::size_t i = 0; i < family_.members.size(); ++i) {
            for (std::size_t j = 0; j < n; ++j) f_[i * n + j] = family_.members[i].pdf(x(j));
        }
    }

    double x(std::size_t j) const { return lo_ + h_ * static_cast<double>(j); }

    void numeric(double mu_hat, double sigma_hat, std::vector<double>& out) const {
        const std::size_t n = opts_.grid_points;
        thread_local std::vector<double> g;
        g.resize(n);
        const double norm = 1.0 / (sigma_hat * std::sqrt(2.0 * std::numbers::pi));
        for (std::size_t j = 0; j < n; ++j) {
            const double z = (x(j) - mu_hat) / sigma_hat;
            g[j] = norm * std::exp(-0.5 * z * z);
        }
        const bool nominal_weight = opts_.divergence.chi_weight == ChiSquaredWeight::Nominal;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double* f = f_.data() + i * n;
            double total = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
                double v = 0.0;
                if (kind_ == DiscrepancyKind::TotalVariation) {
                    v = 0.5 * std::abs(f[j] - g[j]);
                } else {
                    const double ref = nominal_weight ? g[j] : f[j];
                    const double diff = f[j] - g[j];
                    if (ref > 0.0) {
                        v = diff * diff / ref;
                    } else if (diff != 0.0) {
                        v = kInf;
                    }
                }
                total += w * v;
            }
            out[i] = std::max(0.0, total * h_);
        }
    }

    DiscrepancyKind kind_;
    const GaussianFamily& family_;
    const FitOptions& opts_;
    double mu_min_ = 0, mu_max_ = 0, sigma_min_ = 0, sigma_max_ = 0;
    double lo_ = 0.0;
    double h_ = 0.0;
    std::vector<double> f_;
};

}  // namespace

GaussianFamily make_family_grid(double mu_lo, double mu_hi, double sigma_lo, double sigma_hi, std::size_t n_mu,
                                std::size_t n_sigma) {
    if (n_mu == 0 || n_sigma == 0) throw InvalidArgument("make_family_grid: counts must be >= 1");
    if (mu_hi < mu_lo || sigma_hi < sigma_lo) throw InvalidArgument("make_family_grid: ranges must be ordered");
    if ((n_mu > 1 && mu_hi == mu_lo) || (n_sigma > 1 && sigma_hi == sigma_lo)) {
        throw InvalidArgument("make_family_grid: several points on a degenerate range");
    }
    GaussianFamily fam;
    for (double mu : linspace(mu_lo, mu_hi, n_mu)) {
        for (double s : linspace(sigma_lo, sigma_hi, n_sigma)) fam.members.emplace_back(mu, s);
    }
    return fam;
}

GaussianFamily make_family_uniform_draws(std::uint32_t seed, std::size_t count, double mu_lo, double mu_hi,
                                         double sigma_lo, double sigma_hi) {
    if (count == 0) throw InvalidArgument("make_family_uniform_draws: count must be >= 1");
    if (!(mu_lo <= mu_hi) || !(sigma_lo <= sigma_hi) || !(sigma_lo > 0.0)) {
        throw InvalidArgument("make_family_uniform_draws: invalid ranges");
    }
    LegacyMt19937Uniform rng(seed);
    std::vector<double> mus(count);
    for (auto& m : mus) m = rng.next(mu_lo, mu_hi);
    GaussianFamily fam;
    for (std::size_t i = 0; i < count; ++i) fam.members.emplace_back(mus[i], rng.next(sigma_lo, sigma_hi));
    return fam;
}

GaussianFamily comparison_family() { return make_family_uniform_draws(0, 25, -1.0, 1.0, 1.0, 2.0); }

double minimax_objective(DiscrepancyKind kind, const GaussianFamily& family, const Gaussian1& nominal,
                         const FitOptions& opts) {
    FamilyDistances dist(kind, family, opts);
    return dist.worst(nominal.mu(), nominal.sigma());
}

FitResult fit_nominal(DiscrepancyKind kind, const GaussianFamily& family, const FitOptions& opts) {
    if (opts.grid_points < 3) throw InvalidArgument("fit_nominal: grid_points must be >= 3");
    if (opts.restarts == 0 || opts.scan_mu == 0 || opts.scan_sigma == 0) {
        throw InvalidArgument("fit_nominal: scan sizes and restarts must be >= 1");
    }
    const FamilyDistances dist(kind, family, opts);
    const bool rvd = kind == DiscrepancyKind::Rvd;
    if (rvd && opts.sigma_hat_max < dist.sigma_max()) {
        throw InfeasibleDominance("RVD needs sigma_hat >= max member sigma, which the search region excludes");
    }

    FitResult result;
    auto finish = [&](double mu_hat, double sigma_hat) {
        result.nominal = Gaussian1(mu_hat, sigma_hat);
        dist.all(mu_hat, sigma_hat, result.achieved);
        result.radius = *std::max_element(result.achieved.begin(), result.achieved.end());
        return result;
    };
    if (family.members.size() == 1) {
        const auto& m = family.members.front();
        return finish(m.mu(), m.sigma());
    }

    auto sigma_of = [&](double t) { return rvd ? dist.sigma_max() + t * t : t; };
    auto objective = [&](double mu_hat, double t) {
        const double s = sigma_of(t);
        if (!(s > 0.0) || s > opts.sigma_hat_max) return kInf;
        return dist.worst(mu_hat, s);
    };

    // Coarse scan over (mu_hat, t).
    const double mu_span = std::max(dist.mu_max() - dist.mu_min(), 1e-3 * std::max(1.0, dist.sigma_max()));
    const double mu_lo = dist.mu_min() - (dist.mu_max() == dist.mu_min() ? 0.5 * mu_span : 0.0);
    const double mu_hi = mu_lo + mu_span;
    const double t_hi_cap = std::isfinite(opts.sigma_hat_max) ? opts.sigma_hat_max : 2.0 * dist.sigma_max();
    const double t_lo = rvd ? 0.0 : 0.5 * dist.sigma_min();
    const double t_hi = rvd ? std::sqrt(std::max(t_hi_cap - dist.sigma_max(), 1e-6)) : std::min(t_hi_cap, 2.0 * dist.sigma_max());
    const auto mus = linspace(mu_lo, mu_hi, opts.scan_mu);
    const auto ts = linspace(t_lo, t_hi, opts.scan_sigma);

    struct Candidate {
        double value;
        double mu;
        double t;
    };
    std::vector<Candidate> scan(mus.size() * ts.size());
    parallel_for(
        scan.size(),
        [&](std::size_t idx) {
            const double mu = mus[idx / ts.size()];
            const double t = ts[idx % ts.size()];
            scan[idx] = {objective(mu, t), mu, t};
        },
        opts.threads);
    std::size_t evaluations = scan.size();
    std::stable_sort(scan.begin(), scan.end(), [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
    const std::size_t starts = std::min(opts.restarts, scan.size());

    NelderMeadOptions nm;
    nm.initial_step = 0.5 * std::max((mu_hi - mu_lo) / static_cast<double>(std::max<std::size_t>(opts.scan_mu - 1, 1)),
                                     (t_hi - t_lo) / static_cast<double>(std::max<std::size_t>(opts.scan_sigma - 1, 1)));
    nm.f_tol = 1e-4 * opts.tolerance;
    nm.x_tol = 1e-3 * opts.tolerance;
    nm.max_evaluations = 5000;
    nm.restarts = 4;

    std::vector<NelderMeadResult> runs(starts);
    parallel_for(
        starts,
        [&](std::size_t r) {
            runs[r] = nelder_mead([&](std::span<const double> x) { return objective(x[0], x[1]); },
                                  {scan[r].mu, scan[r].t}, nm);
        },
        opts.threads);

    std::size_t best = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        evaluations += runs[r].evaluations;
        if (runs[r].value < runs[best].value) best = r;
    }
    if (!std::isfinite(runs[best].value)) throw DomainError("fit_nominal: no candidate with a finite radius");
    finish(runs[best].x[0], sigma_of(runs[best].x[1]));
    result.evaluations = evaluations;
    return result;
}

std::vector<ComparisonRow> comparison_table(const GaussianFamily& family, double eps, const FitOptions& opts,
                                            const PrlOptions& prl_opts) {
    std::vector<ComparisonRow> rows;
    for (auto kind : kAllDiscrepancyKinds) {
        FitOptions fo = opts;
        fo.divergence = prl_opts.divergence;
        auto fit = fit_nominal(kind, family, fo);
        auto level = prl(kind, fit.radius, eps, prl_opts);
        rows.push_back({kind, std::move(fit), level});
    }
    return rows;
}

}  // namespace drrisk

// Acceptance suite: one line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "drrisk/discrepancy.hpp"
#include "drrisk/distributions.hpp"
#include "drrisk/nominal_fit.hpp"
#include "drrisk/prl.hpp"
#include "drrisk/quadrature.hpp"
#include "drrisk/rmpc.hpp"
#include "drrisk/scenario_bounds.hpp"

using namespace drrisk;

namespace {

// Thresholds.
constexpr double kFitTol = 0.05;
constexpr double kPrlTol = 5e-4;
constexpr double kFitSeconds = 60.0;
constexpr double kRatioTol = 1e-12;
constexpr double kRvdWinsUpTo = 0.35;
constexpr double kCurveSeconds = 10.0;
constexpr double kRvdRelTol = 1e-6;
constexpr double kExpectedRelTol = 1e-8;
constexpr double kIbetaAbsTol = 1e-12;
constexpr double kByPartsTol = 1e-8;
constexpr double kClosedFormSeconds = 10.0;
constexpr std::size_t kOracleSets = 50;
constexpr double kOracleTol = 1e-3;
constexpr double kOracleSeconds = 300.0;
constexpr double kMeanSe = 4.0;
constexpr double kDkwConfidence = 0.999;
constexpr std::size_t kDominancePoints = 100;
constexpr double kRmpcSeconds = 300.0;

using Clock = std::chrono::steady_clock;

int failures = 0;

struct Check {
    std::string detail;
    bool ok = true;
    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

void report(int id, const char* title, Check c, double seconds, double limit) {
    c.require(seconds < limit, "runtime " + num(seconds) + " s over " + num(limit) + " s");
    if (!c.ok) ++failures;
    std::printf("[%s] %d %s (%.2f s)%s%s\n", c.ok ? "PASS" : "FAIL", id, title, seconds,
                c.detail.empty() ? "" : ": ", c.detail.c_str());
    std::fflush(stdout);
}

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Richardson-extrapolated central difference.
double derivative(const std::function<double(double)>& f, double x, double h) {
    const double d1 = (f(x + h) - f(x - h)) / (2 * h);
    const double d2 = (f(x + 2 * h) - f(x - 2 * h)) / (4 * h);
    return (4 * d1 - d2) / 3;
}

std::map<DiscrepancyKind, double> fitted_radii;

void criterion1() {
    const auto t0 = Clock::now();
    struct Row { double mu, sigma, m, prl; };
    const std::map<DiscrepancyKind, Row> expected{
        {DiscrepancyKind::Rvd, {0.15, 2.03, 2.05, 0.0049}},
        {DiscrepancyKind::KullbackLeibler, {0.00, 1.59, 0.19, 0.0}},
        {DiscrepancyKind::Hellinger, {-0.02, 1.48, 0.23, 0.0}},
        {DiscrepancyKind::ChiSquared, {0.05, 1.75, 0.36, 0.0003}},
        {DiscrepancyKind::TotalVariation, {-0.04, 1.59, 0.24, 0.0}},
    };
    const auto rows = comparison_table(comparison_family(), 0.01);
    const double seconds = since(t0);
    Check c;
    c.require(rows.size() == 5, "expected 5 rows");
    for (const auto& r : rows) {
        const Row& e = expected.at(r.kind);
        const std::string k(to_string(r.kind));
        fitted_radii[r.kind] = r.fit.radius;
        c.require(std::abs(r.fit.nominal.mu() - e.mu) <= kFitTol, k + " mu_hat " + num(r.fit.nominal.mu()));
        c.require(std::abs(r.fit.nominal.sigma() - e.sigma) <= kFitTol, k + " sigma_hat " + num(r.fit.nominal.sigma()));
        c.require(std::abs(r.fit.radius - e.m) <= kFitTol, k + " radius " + num(r.fit.radius));
        c.require(std::abs(r.prl.eps_hat - e.prl) <= kPrlTol, k + " prl " + num(r.prl.eps_hat));
    }
    report(1, "comparison table: fitted nominals, radii and PRL at eps 0.01", c, seconds, kFitSeconds);
}

void criterion2() {
    // Radii come from criterion 1; the timing covers the curves only.
    const auto t0 = Clock::now();
    Check c;
    c.require(fitted_radii.size() == 5, "criterion 1 did not produce radii");
    if (fitted_radii.size() == 5) {
        const auto grid = log_spaced(1e-4, 0.9, 200);
        std::map<DiscrepancyKind, std::vector<PrlResult>> curves;
        for (auto k : kAllDiscrepancyKinds) curves[k] = prl_curve(k, fitted_radii[k], grid);
        const auto& rvd = curves[DiscrepancyKind::Rvd];
        const double ratio0 = rvd.front().eps_hat / rvd.front().eps;
        double worst_ratio = 0.0;
        for (const auto& r : rvd) worst_ratio = std::max(worst_ratio, std::abs(r.eps_hat / r.eps - ratio0));
        c.require(worst_ratio <= kRatioTol, "rvd ratio varies by " + num(worst_ratio));
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid[i] > kRvdWinsUpTo) continue;
            for (auto k : kAllDiscrepancyKinds) {
                if (k == DiscrepancyKind::Rvd) continue;
                if (!(rvd[i].eps_hat > curves[k][i].eps_hat)) {
                    c.require(false, std::string(to_string(k)) + " >= rvd at eps " + num(grid[i]));
                }
            }
        }
    }
    report(2, "PRL curves: constant RVD ratio, RVD above every phi-divergence for eps <= 0.35", c, since(t0),
           kCurveSeconds);
}

void criterion3() {
    const auto t0 = Clock::now();
    Check c;
    // (a) random dominated Gaussian pairs.
    Rng rng(2024);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const int n = i % 2 == 0 ? 1 : 2;
        Eigen::MatrixXd a(n, n), b(n, n);
        for (int r = 0; r < n; ++r) {
            for (int s = 0; s < n; ++s) {
                a(r, s) = rng.uniform01() - 0.5;
                b(r, s) = rng.uniform01() - 0.5;
            }
        }
        const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
        const Eigen::MatrixXd sigma = a * a.transpose() + 0.3 * eye;
        const Eigen::MatrixXd sigma_hat = sigma + b * b.transpose() + 0.2 * eye;
        Eigen::VectorXd mu(n), mu_hat(n);
        for (int r = 0; r < n; ++r) {
            mu(r) = rng.uniform01() - 0.5;
            mu_hat(r) = rng.uniform01() - 0.5;
        }
        const GaussianNd p(mu, sigma);
        const GaussianNd phat(mu_hat, sigma_hat);
        const double closed = rvd_gaussian_nd(p, phat);
        const Distribution dp = p;
        const Distribution dq = phat;
        const double numeric = rvd_numeric(dp, dq, default_grids(dp, dq));
        worst = std::max(worst, rel(numeric, closed));
    }
    c.require(worst < kRvdRelTol, "(a) rvd rel err " + num(worst));

    // (b) closed-form expected bound against quadrature.
    const ScenarioParams sp(1000, 2);
    const double closed = expected_dr_rvd(sp, 4.0);
    const double numeric = expected_dr_numeric(sp, DiscrepancyKind::Rvd, 4.0);
    c.require(rel(numeric, closed) < kExpectedRelTol, "(b) expected bound rel err " + num(rel(numeric, closed)));

    // (c) binomial sum against the regularized incomplete beta (evaluated directly here).
    for (double eps : {1e-4, 1e-3, 0.002, 0.01, 0.05}) {
        const double ib = boost::math::ibeta(1000.0 - 2.0 + 1.0, 2.0, 1.0 - eps);
        const double err = std::abs(two_level_nominal(sp, eps) - ib);
        c.require(err < kIbetaAbsTol, "(c) ibeta err " + num(err) + " at eps " + num(eps));
    }

    // (d) by-parts decomposition against the direct integral.
    for (double m : {1.5, 4.0, 10.0}) {
        const double parts = expected_dr_rvd_by_parts(sp, m);
        const double direct = expected_dr_numeric(sp, DiscrepancyKind::Rvd, m);
        c.require(std::abs(parts - direct) < kByPartsTol, "(d) by-parts diff " + num(parts - direct) + " at M " + num(m));
    }
    report(3, "closed-form cross-checks (rvd numeric, expected bound, ibeta, by-parts)", c, since(t0),
           kClosedFormSeconds);
}

void criterion4() {
    const auto t0 = Clock::now();
    Check c;
    Rng rng(42);
    std::size_t disagreements = 0;
    std::size_t violations = 0;
    std::size_t members = 0;
    for (std::size_t i = 0; i < kOracleSets; ++i) {
        const auto kind = kAllDiscrepancyKinds[i % 5];
        const double u = rng.uniform01();
        const double m = kind == DiscrepancyKind::Rvd              ? 1.0 + 3.0 * u
                         : kind == DiscrepancyKind::TotalVariation ? 0.2 * u
                                                                   : 0.5 * u;
        const double eps = 0.02 + 0.3 * rng.uniform01();
        std::vector<double> w(3);
        double s = 0.0;
        for (auto& x : w) s += (x = rng.uniform01() + 0.1);
        for (auto& x : w) x /= s;
        const AmbiguitySet set(kind, m, DiscreteDist({{0.0}, {1.0}, {2.0}}, w));
        const double p = prl(kind, m, eps).eps_hat;
        const double o = prl_bruteforce_oracle(set, eps);
        if (std::abs(p - o) > kOracleTol + 1e-12) ++disagreements;
        const auto sr = prl_soundness_check(set, eps, p, 40);
        violations += sr.violations;
        members += sr.members_in_ball;
    }
    c.require(disagreements == 0, std::to_string(disagreements) + " oracle disagreements");
    c.require(violations == 0, std::to_string(violations) + " soundness violations");
    c.require(members > 0, "no ball members enumerated");
    report(4, "PRL soundness oracle on 50 random 3-atom sets", c, since(t0), kOracleSeconds);
}

void criterion5() {
    const auto t0 = Clock::now();
    Check c;
    RmpcExperiment exp;
    exp.n_trials = 200;
    exp.n_eval = 10000;
    const auto rep = run_experiment(exp);
    const ScenarioParams sp(exp.n_scenarios, exp.support_dim());

    c.require(rep.infeasible == 0, std::to_string(rep.infeasible) + " infeasible trials");
    const double target = 2.0 / 1001.0;
    const double z = (rep.mean_nominal - target) / rep.se_nominal;
    c.require(std::abs(z) <= kMeanSe, "(a) nominal mean " + num(rep.mean_nominal) + " z " + num(z));
    const double bound = expected_dr_rvd(sp, exp.m_rvd);
    c.require(rep.mean_truth <= bound, "(b) truth mean " + num(rep.mean_truth) + " above " + num(bound));

    const auto grid = dominance_grid(0.05, kDominancePoints);
    std::vector<double> fn(grid.size()), fdr(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        fn[i] = two_level_nominal(sp, grid[i]);
        fdr[i] = two_level_dr(sp, DiscrepancyKind::Rvd, exp.m_rvd, grid[i]);
    }
    const auto dn = check_dominance(rep.nominal_values(), grid, fn, kDkwConfidence);
    const auto dt = check_dominance(rep.truth_values(), grid, fdr, kDkwConfidence);
    c.require(dn.holds(), "(c) nominal survival excess " + num(dn.max_excess) + " at " + num(dn.worst_eps));
    c.require(dt.holds(), "(c) truth survival excess " + num(dt.max_excess) + " at " + num(dt.worst_eps));
    c.require(rep.max_support <= 2, "(d) support count " + std::to_string(rep.max_support));
    const double seconds = since(t0);

    const auto again = run_experiment(exp);
    c.require(report_json(exp, again) == report_json(exp, rep), "(e) reports differ for the same seed");
    std::printf("    nominal mean %.6g (se %.3g), truth mean %.6g, bound %.6g\n", rep.mean_nominal, rep.se_nominal,
                rep.mean_truth, bound);
    report(5, "randomized MPC experiment at desk scale (200 trials x 10000 evaluations)", c, seconds, kRmpcSeconds);
}

void criterion6() {
    const auto t0 = Clock::now();
    Check c;
    // PRL: nondecreasing in eps, nonincreasing in the radius, never above eps, sound for its own reduction.
    const auto grid = log_spaced(1e-4, 0.9, 80);
    for (auto k : kAllDiscrepancyKinds) {
        const std::string name(to_string(k));
        const std::vector<double> radii = k == DiscrepancyKind::Rvd ? std::vector<double>{1.0, 1.5, 3.0}
                                                                     : std::vector<double>{0.0, 0.01, 0.1, 0.4};
        std::vector<double> prev(grid.size(), 2.0);
        for (double m : radii) {
            double last = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double a = prl(k, m, grid[i]).eps_hat;
                c.require(a >= last - 1e-12, name + " prl not monotone in eps");
                c.require(a <= grid[i] * (1 + 1e-12), name + " prl above eps");
                c.require(a <= prev[i] + 1e-12, name + " prl not monotone in radius");
                if (a > 0) c.require(worst_case_prob(k, m, a) <= grid[i] * (1 + 1e-9), name + " worst case above eps");
                last = a;
                prev[i] = a;
            }
        }
    }

    // Divergences: zero at identity, nonnegative.
    const Gaussian1 g(0.2, 1.3);
    for (auto k : kAllDiscrepancyKinds) {
        const Distribution d = g;
        const double self = divergence_numeric(k, d, d, default_grids(d, d, 4001));
        c.require(std::abs(self - (k == DiscrepancyKind::Rvd ? 1.0 : 0.0)) < 1e-9,
                  std::string(to_string(k)) + " not minimal at identity");
        const Distribution q = Gaussian1(0.0, 1.5);
        c.require(divergence_numeric(k, d, q, default_grids(d, q, 4001)) >= 0.0, "negative divergence");
    }

    // Normalization.
    const ScenarioParams sp(1000, 2);
    const SimpsonOptions so{1e-12, 1'000'000, 60};
    const double beta_mass = adaptive_simpson([&](double e) { return beta_density_nominal(sp, e); }, 0, 1, so).value;
    c.require(std::abs(beta_mass - 1.0) < 1e-9, "beta density mass " + num(beta_mass));
    const double dr_mass = adaptive_simpson([&](double e) { return dr_density_rvd(sp, 4.0, e); }, 0, 1, so).value;
    c.require(std::abs(dr_mass - (1.0 - two_level_nominal(sp, 0.25))) < 1e-9, "dr density mass " + num(dr_mass));
    const double gauss_mass = adaptive_simpson([&](double x) { return g.pdf(x); }, -20, 20, so).value;
    c.require(std::abs(gauss_mass - 1.0) < 1e-9, "gaussian mass " + num(gauss_mass));
    c.require(two_level_nominal(sp, 0.0) == 1.0 && two_level_nominal(sp, 1.0) == 0.0, "F_N endpoints");
    double last = 1.0;
    for (double e : grid) {
        const double f = two_level_nominal(sp, e);
        c.require(f <= last + 1e-15, "F_N not decreasing");
        last = f;
    }

    // Density-CDF derivative consistency.
    for (double e : {1e-3, 2e-3, 5e-3, 0.01}) {
        const double d = derivative([&](double x) { return two_level_nominal(sp, x); }, e, 1e-5);
        c.require(rel(-d, beta_density_nominal(sp, e)) < 1e-6, "dF_N/deps at " + num(e));
        const double ddr = derivative([&](double x) { return two_level_dr(sp, DiscrepancyKind::Rvd, 4.0, x); }, e, 1e-5);
        c.require(rel(-ddr, dr_density_rvd(sp, 4.0, e)) < 1e-6, "dF_dr/deps at " + num(e));
    }
    for (double x : {-1.0, 0.2, 1.7}) {
        const double d = derivative([&](double t) { return g.cdf(t); }, x, 1e-4);
        c.require(rel(d, g.pdf(x)) < 1e-8, "gaussian cdf derivative at " + num(x));
    }

    // Determinism.
    for (const Distribution& d : {Distribution(g), Distribution(UniformBox({-0.2, -0.2}, {0.2, 0.2})),
                                  Distribution(RingUniform(0.1, 0.2, 2))}) {
        c.require(sample(d, 9, 500) == sample(d, 9, 500), "sampling not deterministic for " + describe(d));
    }
    FitOptions one;
    one.threads = 1;
    const auto fam = make_family_grid(-0.5, 0.5, 1.0, 1.5, 3, 3);
    const auto fa = fit_nominal(DiscrepancyKind::KullbackLeibler, fam, one);
    const auto fb = fit_nominal(DiscrepancyKind::KullbackLeibler, fam);
    c.require(fa.nominal == fb.nominal && fa.radius == fb.radius, "fit depends on thread count");

    report(6, "property checks (monotonicity, normalization, derivatives, determinism)", c, since(t0), 60.0);
}

}  // namespace

int main() {
    const std::vector<void (*)()> criteria{criterion1, criterion2, criterion3, criterion4, criterion5, criterion6};
    for (auto f : criteria) {
        try {
            f();
        } catch (const std::exception& e) {
            ++failures;
            std::printf("[FAIL] exception: %s\n", e.what());
        }
    }
    std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}

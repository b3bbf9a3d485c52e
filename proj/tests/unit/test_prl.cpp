#include <cmath>
#include <functional>

#include "doctest.h"
#include "drrisk/errors.hpp"
#include "drrisk/prl.hpp"

using namespace drrisk;

namespace {

// chi2 with nominal weighting: alpha + sqrt(M alpha (1 - alpha)) = eps is a quadratic in alpha.
double chi2_prl_closed_form(double m, double eps) {
    const double b = 2.0 * eps + m;
    return (b - std::sqrt(b * b - 4.0 * (1.0 + m) * eps * eps)) / (2.0 * (1.0 + m));
}

// Reference two-level bisection written against the raw Bernoulli formulas.
double reference_prl(const std::function<double(double, double)>& d, double m, double eps) {
    auto worst = [&](double a) {
        double lo = a, hi = 1.0;
        if (d(1.0, a) <= m) return 1.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (d(mid, a) <= m ? lo : hi) = mid;
        }
        return hi;
    };
    double lo = 0.0, hi = eps;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (worst(mid) <= eps ? lo : hi) = mid;
    }
    return lo;
}

double kl_bern(double b, double a) {
    auto t = [](double x, double y) { return x == 0.0 ? 0.0 : x * std::log(x / y); };
    return t(b, a) + t(1.0 - b, 1.0 - a);
}

double hellinger_bern(double b, double a) {
    return std::sqrt(std::max(0.0, 1.0 - std::sqrt(a * b) - std::sqrt((1.0 - a) * (1.0 - b))));
}

}  // namespace

TEST_CASE("rvd prl is eps / M") {
    CHECK(prl(DiscrepancyKind::Rvd, 2.05, 0.01).eps_hat == doctest::Approx(0.004878048780487805).epsilon(1e-15));
    CHECK(prl(DiscrepancyKind::Rvd, 1.0, 0.3).eps_hat == 0.3);
    CHECK(prl(DiscrepancyKind::Rvd, 4.0, 0.0).eps_hat == 0.0);
    CHECK(worst_case_prob(DiscrepancyKind::Rvd, 4.0, 0.3) == 1.0);
}

TEST_CASE("total variation prl is eps - M clipped at zero") {
    CHECK(prl(DiscrepancyKind::TotalVariation, 0.1, 0.3).eps_hat == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(prl(DiscrepancyKind::TotalVariation, 0.243, 0.01).eps_hat == 0.0);
}

TEST_CASE("chi-squared prl matches the quadratic root") {
    for (double m : {0.01, 0.1, 0.359, 1.0}) {
        for (double eps : {0.001, 0.01, 0.1, 0.5}) {
            const double expected = chi2_prl_closed_form(m, eps);
            CHECK(prl(DiscrepancyKind::ChiSquared, m, eps).eps_hat == doctest::Approx(expected).epsilon(1e-9));
        }
    }
    // Table value for the fitted chi-squared radius.
    CHECK(prl(DiscrepancyKind::ChiSquared, 0.359, 0.01).eps_hat == doctest::Approx(2.64e-4).epsilon(0.01));
}

TEST_CASE("kl and hellinger prl match a reference bisection") {
    for (double eps : {0.01, 0.05, 0.2, 0.6}) {
        CHECK(prl(DiscrepancyKind::KullbackLeibler, 0.19, eps).eps_hat ==
              doctest::Approx(reference_prl(kl_bern, 0.19, eps)).epsilon(1e-8));
        CHECK(prl(DiscrepancyKind::Hellinger, 0.15, eps).eps_hat ==
              doctest::Approx(reference_prl(hellinger_bern, 0.15, eps)).epsilon(1e-8));
    }
    CHECK(prl(DiscrepancyKind::Hellinger, 0.225, 0.01).eps_hat == 0.0);
    CHECK(prl(DiscrepancyKind::KullbackLeibler, 0.19, 0.01).eps_hat < 1e-9);
}

TEST_CASE("prl is sound and tight") {
    for (auto kind : kAllDiscrepancyKinds) {
        const double m = kind == DiscrepancyKind::Rvd ? 1.7 : 0.05;
        for (double eps : {0.02, 0.1, 0.4}) {
            const double a = prl(kind, m, eps).eps_hat;
            CHECK(a <= eps);
            // Zero means no nominal level is enough (e.g. total variation with M > eps).
            if (a > 0.0) CHECK(worst_case_prob(kind, m, a) <= eps * (1.0 + 1e-12));
            if (a > 0.0 && a < eps) CHECK(worst_case_prob(kind, m, std::min(eps, a + 1e-8)) > eps);
        }
    }
}

TEST_CASE("prl monotonicity") {
    for (auto kind : kAllDiscrepancyKinds) {
        const double m0 = kind == DiscrepancyKind::Rvd ? 1.0 : 0.0;
        CHECK(prl(kind, m0, 0.2).eps_hat == doctest::Approx(0.2));
        double prev = -1.0;
        for (double eps = 0.01; eps < 1.0; eps += 0.049) {
            const double a = prl(kind, m0 + 0.2, eps).eps_hat;
            CHECK(a >= prev);
            prev = a;
        }
        prev = 2.0;
        for (double m = m0; m < m0 + 1.0; m += 0.1) {
            const double a = prl(kind, m, 0.3).eps_hat;
            CHECK(a <= prev);
            prev = a;
        }
    }
}

TEST_CASE("binary divergences") {
    CHECK(binary_divergence(DiscrepancyKind::KullbackLeibler, 0.5, 0.25) == doctest::Approx(kl_bern(0.5, 0.25)));
    CHECK(binary_divergence(DiscrepancyKind::KullbackLeibler, 0.0, 0.25) == doctest::Approx(std::log(4.0 / 3.0)));
    CHECK(std::isinf(binary_divergence(DiscrepancyKind::KullbackLeibler, 0.5, 0.0)));
    CHECK(binary_divergence(DiscrepancyKind::Rvd, 0.5, 0.25) == doctest::Approx(2.0));
    CHECK(binary_divergence(DiscrepancyKind::ChiSquared, 0.5, 0.25) == doctest::Approx(0.0625 / 0.1875));
    CHECK(binary_divergence(DiscrepancyKind::ChiSquared, 0.5, 0.25, {ChiSquaredWeight::Member}) ==
          doctest::Approx(0.0625 / 0.25));
    CHECK_THROWS_AS(binary_divergence(DiscrepancyKind::TotalVariation, 1.5, 0.2), InvalidArgument);
}

TEST_CASE("radius and eps validation") {
    CHECK_THROWS_AS(prl(DiscrepancyKind::Rvd, 0.9, 0.1), InvalidArgument);
    CHECK_THROWS_AS(prl(DiscrepancyKind::KullbackLeibler, -0.1, 0.1), InvalidArgument);
    CHECK_THROWS_AS(prl(DiscrepancyKind::KullbackLeibler, 0.1, 1.1), InvalidArgument);
    CHECK_THROWS_AS(AmbiguitySet(DiscrepancyKind::Rvd, 0.5, Gaussian1(0, 1)), InvalidArgument);
}

TEST_CASE("prl curve matches pointwise evaluation") {
    const auto grid = log_spaced(1e-4, 0.9, 40);
    CHECK(grid.front() == doctest::Approx(1e-4));
    CHECK(grid.back() == doctest::Approx(0.9));
    const auto curve = prl_curve(DiscrepancyKind::Hellinger, 0.2, grid);
    REQUIRE(curve.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(curve[i].eps_hat == prl(DiscrepancyKind::Hellinger, 0.2, grid[i]).eps_hat);
    }
}

TEST_CASE("simplex grid enumerates all compositions") {
    const auto g = simplex_grid(3, 4);
    CHECK(g.size() == 15);  // C(6, 2)
    for (const auto& w : g) {
        double s = 0.0;
        for (double x : w) s += x;
        CHECK(s == doctest::Approx(1.0));
    }
}

TEST_CASE("brute-force oracle agrees with the two-outcome reduction") {
    Rng rng(2024);
    for (int i = 0; i < 10; ++i) {
        const auto kind = kAllDiscrepancyKinds[static_cast<std::size_t>(i % 5)];
        const double m = kind == DiscrepancyKind::Rvd ? 1.0 + 2.0 * rng.uniform01() : 0.3 * rng.uniform01();
        const double eps = 0.05 + 0.3 * rng.uniform01();
        const AmbiguitySet set(kind, m, DiscreteDist({{0.0}, {1.0}, {2.0}}, {0.2, 0.3, 0.5}));
        const double a = prl(kind, m, eps).eps_hat;
        CHECK(std::abs(prl_bruteforce_oracle(set, eps) - a) <= 1e-3);
        const auto report = prl_soundness_check(set, eps, a, 30);
        CHECK(report.members_in_ball > 0);
        CHECK(report.violations == 0);
    }
}

TEST_CASE("oracle worked examples") {
    const AmbiguitySet singleton(DiscrepancyKind::KullbackLeibler, 0.0, DiscreteDist({{0.0}, {1.0}, {2.0}}, {0.2, 0.3, 0.5}));
    CHECK(prl_bruteforce_oracle(singleton, 0.25) == doctest::Approx(0.25).epsilon(1e-3));
    const AmbiguitySet rvd2(DiscrepancyKind::Rvd, 2.0, DiscreteDist({{0.0}, {1.0}, {2.0}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}));
    CHECK(prl_bruteforce_oracle(rvd2, 0.2) == doctest::Approx(0.1).epsilon(1e-2));
}

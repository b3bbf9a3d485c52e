#include <cmath>

#include <boost/math/distributions/binomial.hpp>

#include "doctest.h"
#include "drrisk/errors.hpp"
#include "drrisk/quadrature.hpp"
#include "drrisk/scenario_bounds.hpp"

using namespace drrisk;

namespace {

const ScenarioParams kPaper(1000, 2);

double integrate(const std::function<double(double)>& f, double a = 0.0, double b = 1.0) {
    const auto r = adaptive_simpson(f, a, b, {1e-13, 2'000'000, 60});
    REQUIRE(r.converged);
    return r.value;
}

// Exact product form for small N.
double pmf_product(int n, int l, double a) {
    double c = 1.0;
    for (int i = 0; i < l; ++i) c = c * (n - i) / (i + 1);
    return c * std::pow(a, l) * std::pow(1.0 - a, n - l);
}

}  // namespace

TEST_CASE("binomial pmf") {
    CHECK(binom_pmf(10, 0, 0.0) == 1.0);
    CHECK(binom_pmf(10, 3, 0.0) == 0.0);
    CHECK(binom_pmf(4, 2, 0.5) == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(binom_pmf(1000, 2, 0.002) == doctest::Approx(0.2709).epsilon(1e-4));
    // 1000 * 999 / 2 * 0.002^2 * 0.998^998
    CHECK(binom_pmf(1000, 2, 0.002) == doctest::Approx(499500.0 * 4e-6 * std::pow(0.998, 998)).epsilon(1e-12));
    for (int l = 0; l <= 20; ++l) CHECK(binom_pmf(20, static_cast<std::size_t>(l), 0.3) == doctest::Approx(pmf_product(20, l, 0.3)).epsilon(1e-12));
    double s = 0.0;
    for (std::size_t l = 0; l <= 1000; ++l) s += binom_pmf(1000, l, 0.37);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(binom_pmf(3, 4, 0.5), InvalidArgument);
    CHECK_THROWS_AS(binom_pmf(3, 1, 1.5), InvalidArgument);
}

TEST_CASE("two-level nominal bound") {
    CHECK(two_level_nominal(kPaper, 0.0) == 1.0);
    CHECK(two_level_nominal(kPaper, 1.0) == 0.0);
    CHECK(two_level_nominal(ScenarioParams(5, 5), 1.0) == 0.0);
    CHECK(two_level_nominal(kPaper, 0.01) == doctest::Approx(4.81e-4).epsilon(2e-3));
    for (double eps : {0.001, 0.01, 0.1, 0.5, 0.9}) {
        CHECK(std::abs(two_level_nominal(kPaper, eps) - two_level_nominal_ibeta(kPaper, eps)) < 1e-12);
        const boost::math::binomial_distribution<double> bin(1000.0, eps);
        CHECK(two_level_nominal(kPaper, eps) == doctest::Approx(boost::math::cdf(bin, 1.0)).epsilon(1e-10));
    }
    double prev = 2.0;
    for (double eps = 0.0; eps <= 1.0; eps += 0.001) {
        const double f = two_level_nominal(ScenarioParams(200, 7), eps);
        CHECK(f <= prev);
        CHECK(f >= 0.0);
        prev = f;
    }
    CHECK_THROWS_AS(ScenarioParams(10, 11), InvalidArgument);
    CHECK_THROWS_AS(ScenarioParams(10, 0), InvalidArgument);
}

TEST_CASE("two-level robust bound") {
    CHECK(two_level_dr(kPaper, DiscrepancyKind::Rvd, 1.0, 0.01) == two_level_nominal(kPaper, 0.01));
    CHECK(two_level_dr(kPaper, DiscrepancyKind::Rvd, 4.0, 0.02) ==
          doctest::Approx(two_level_nominal(kPaper, 0.005)).epsilon(1e-14));
    CHECK(two_level_dr(kPaper, DiscrepancyKind::Rvd, 4.0, 0.0) == 1.0);
    CHECK_THROWS_AS(two_level_dr(kPaper, DiscrepancyKind::Rvd, 0.5, 0.1), InvalidArgument);
    double prev = 2.0;
    for (double eps = 0.0; eps <= 0.2; eps += 0.002) {
        const double f = two_level_dr(kPaper, DiscrepancyKind::KullbackLeibler, 0.19, eps);
        CHECK(f <= prev);
        CHECK(f >= two_level_nominal(kPaper, eps));
        CHECK(f <= two_level_dr(kPaper, DiscrepancyKind::KullbackLeibler, 0.3, eps));
        prev = f;
    }
}

TEST_CASE("beta density") {
    CHECK(integrate([](double e) { return beta_density_nominal(kPaper, e); }) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(beta_density_nominal(kPaper, 0.0) == 0.0);
    const double mode = 1.0 / 999.0;
    CHECK(beta_density_nominal(kPaper, mode) > beta_density_nominal(kPaper, mode - 1e-5));
    CHECK(beta_density_nominal(kPaper, mode) > beta_density_nominal(kPaper, mode + 1e-5));
    const double h = 1e-7;
    const double slope = (beta_density_nominal(kPaper, mode + h) - beta_density_nominal(kPaper, mode - h)) / (2 * h);
    CHECK(std::abs(slope) < 1e-3 * beta_density_nominal(kPaper, mode) / mode);
}

TEST_CASE("robust density") {
    for (double e : {0.0, 0.001, 0.01, 0.3}) {
        CHECK(dr_density_rvd(kPaper, 1.0, e) == beta_density_nominal(kPaper, e));
        CHECK(dr_density_rvd(kPaper, 4.0, e) == doctest::Approx(beta_density_nominal(kPaper, e / 4.0) / 4.0));
    }
    CHECK(integrate([](double e) { return dr_density_rvd(kPaper, 4.0, e); }) ==
          doctest::Approx(1.0 - two_level_nominal(kPaper, 0.25)).epsilon(1e-8));
}

// Central differences at h and 2h combined by Richardson extrapolation. A
// single central difference carries h^2 F''' / 6 ~ 1e-5 relative error here.
double derivative(const std::function<double(double)>& f, double x, double h = 1e-5) {
    const double d1 = (f(x + h) - f(x - h)) / (2 * h);
    const double d2 = (f(x + 2 * h) - f(x - 2 * h)) / (4 * h);
    return (4 * d1 - d2) / 3;
}

TEST_CASE("density is minus the derivative of the bound") {
    for (double e : {0.0005, 0.001, 0.002, 0.004, 0.008}) {
        const double d = -derivative([](double x) { return two_level_nominal(kPaper, x); }, e);
        CHECK(d == doctest::Approx(beta_density_nominal(kPaper, e)).epsilon(1e-6));
        const double d4 = -derivative([](double x) { return two_level_dr(kPaper, DiscrepancyKind::Rvd, 4.0, x); }, 4 * e);
        CHECK(d4 == doctest::Approx(dr_density_rvd(kPaper, 4.0, 4 * e)).epsilon(1e-6));
    }
}

TEST_CASE("expected violation bounds") {
    CHECK(expected_nominal(kPaper) == 2.0 / 1001.0);
    CHECK(expected_nominal(ScenarioParams(1, 1)) == 0.5);
    CHECK(integrate([](double e) { return e * beta_density_nominal(kPaper, e); }) ==
          doctest::Approx(expected_nominal(kPaper)).epsilon(1e-8));
    CHECK(expected_dr_rvd(kPaper, 1.0) == doctest::Approx(2.0 / 1001.0).epsilon(1e-14));
    const double v = expected_dr_rvd(kPaper, 4.0);
    CHECK(v > expected_nominal(kPaper));
    CHECK(v <= 1.0);
    CHECK(std::abs(expected_dr_numeric(kPaper, DiscrepancyKind::Rvd, 4.0) - v) < 1e-8 * v);
    CHECK(std::abs(expected_dr_numeric(kPaper, DiscrepancyKind::Rvd, 1.0) - 2.0 / 1001.0) < 1e-8);
    CHECK(std::abs(expected_dr_rvd_by_parts(kPaper, 4.0) - expected_dr_numeric(kPaper, DiscrepancyKind::Rvd, 4.0)) <
          1e-8);
    double prev = 0.0;
    for (double m = 1.0; m <= 10.0; m += 0.5) {
        const double e = expected_dr_rvd(kPaper, m);
        CHECK(e >= prev);
        prev = e;
    }
}

TEST_CASE("expected bound for a phi-divergence ball") {
    const double kl = expected_dr_numeric(kPaper, DiscrepancyKind::KullbackLeibler, 0.19);
    CHECK(std::isfinite(kl));
    CHECK(kl >= expected_nominal(kPaper));
    // Regression value of the quadrature.
    CHECK(kl == doctest::Approx(0.0691898055122076).epsilon(1e-7));
    // M = 0 leaves the nominal bound.
    CHECK(expected_dr_numeric(kPaper, DiscrepancyKind::TotalVariation, 0.0) ==
          doctest::Approx(expected_nominal(kPaper)).epsilon(1e-8));
    // Total variation: eps_hat = eps - M, so the integral is M + int_0^{1-M} F_N(t) dt.
    const double tv = expected_dr_numeric(kPaper, DiscrepancyKind::TotalVariation, 0.1);
    const double tail = integrate([](double t) { return two_level_nominal(kPaper, t); }, 0.0, 0.9);
    CHECK(tv == doctest::Approx(0.1 + tail).epsilon(1e-8));
}

TEST_CASE("dkw band") {
    CHECK(dkw_band(0.999, 200) == doctest::Approx(std::sqrt(std::log(2000.0) / 400.0)));
    CHECK_THROWS_AS(dkw_band(1.0, 10), InvalidArgument);
}

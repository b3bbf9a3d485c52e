#pragma once

#include <cstddef>

#include "drrisk/discrepancy.hpp"
#include "drrisk/prl.hpp"
#include "drrisk/quadrature.hpp"

namespace drrisk {

// N sampled constraints with at most d support constraints.
struct ScenarioParams {
    ScenarioParams(std::size_t n_samples, std::size_t support_dim);
    std::size_t n;
    std::size_t d;
};

// C(N,l) alpha^l (1-alpha)^(N-l), evaluated through log-gamma.
double binom_pmf(std::size_t n, std::size_t l, double alpha);

// Confidence bound F_N(eps) = sum_{i<d} pmf(N, i, eps): the probability that the
// scenario solution violates with probability above eps.
double two_level_nominal(const ScenarioParams& p, double eps);

// Same quantity as the regularized incomplete beta I_{1-eps}(N-d+1, d).
double two_level_nominal_ibeta(const ScenarioParams& p, double eps);

// F_N evaluated at the perturbed risk level of eps.
double two_level_dr(const ScenarioParams& p, DiscrepancyKind kind, double radius, double eps,
                    const PrlOptions& opts = {});

// d C(N,d) eps^(d-1) (1-eps)^(N-d): density of the beta law dominating the violation probability.
double beta_density_nominal(const ScenarioParams& p, double eps);

// beta_density_nominal(eps / M) / M. Integrates over [0,1] to 1 - F_N(1/M).
double dr_density_rvd(const ScenarioParams& p, double m, double eps);

// d / (N + 1).
double expected_nominal(const ScenarioParams& p);

// Closed-form expected violation bound under an RVD ball of radius m.
double expected_dr_rvd(const ScenarioParams& p, double m);

struct ExpectedBoundOptions {
    // Bisection noise in the perturbed level shows up directly in the
    // integrand, so it is resolved far below the quadrature tolerance.
    PrlOptions prl{{}, 1e-15, 200};
    SimpsonOptions quadrature{1e-12, 1'000'000, 60};
};

// Integral over [0,1] of two_level_dr(eps). The interval is split where the
// perturbed level stops being zero, which is where the integrand has a kink.
double expected_dr_numeric(const ScenarioParams& p, DiscrepancyKind kind, double radius,
                           const ExpectedBoundOptions& opts = {});

// Integration-by-parts form of the RVD expected bound:
// F_N(eps_hat(1)) + integral of eps * dr_density_rvd(eps).
double expected_dr_rvd_by_parts(const ScenarioParams& p, double m, const SimpsonOptions& opts = {1e-12, 1'000'000, 60});

// Half-width of the Dvoretzky-Kiefer-Wolfowitz band holding with the given confidence.
double dkw_band(double confidence, std::size_t n);

}  // namespace drrisk

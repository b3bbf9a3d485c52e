#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "drrisk/discrepancy.hpp"
#include "drrisk/distributions.hpp"

namespace drrisk {

// {P : rho_kind(P, nominal) <= radius}. RVD radii start at 1, all others at 0.
class AmbiguitySet {
public:
    AmbiguitySet(DiscrepancyKind kind, double radius, Distribution nominal);

    DiscrepancyKind kind() const noexcept { return kind_; }
    double radius() const noexcept { return radius_; }
    const Distribution& nominal() const noexcept { return nominal_; }

private:
    DiscrepancyKind kind_;
    double radius_;
    Distribution nominal_;
};

struct PrlResult {
    double eps = 0.0;
    double eps_hat = 0.0;
    DiscrepancyKind kind = DiscrepancyKind::Rvd;
    double radius = 1.0;
};

struct PrlOptions {
    DivergenceOptions divergence;
    // Bisection stops once the bracket is below tolerance * min(1, eps).
    double tolerance = 1e-10;
    int max_iterations = 200;
};

// Throws InvalidArgument for radii outside the kind's range.
void validate_radius(DiscrepancyKind kind, double radius);

// rho(Bernoulli(beta), Bernoulli(alpha)) with 0 log 0 = 0 and +infinity where
// the functional is unbounded.
double binary_divergence(DiscrepancyKind kind, double beta, double alpha, const DivergenceOptions& opts = {});

// sup over the ball of P(E) for an event of nominal probability alpha, via the
// two-outcome reduction: max{beta in [alpha, 1] : d(beta, alpha) <= M}.
// RVD gives min(M alpha, 1) and total variation min(alpha + M, 1).
double worst_case_prob(DiscrepancyKind kind, double radius, double alpha, const PrlOptions& opts = {});

// Perturbed risk level: the largest nominal risk alpha <= eps whose worst case
// stays within eps. RVD is exactly eps / M; other kinds use bisection and
// return the lower (safe) end of the final bracket.
PrlResult prl(DiscrepancyKind kind, double radius, double eps, const PrlOptions& opts = {});

std::vector<PrlResult> prl_curve(DiscrepancyKind kind, double radius, std::span<const double> eps_grid,
                                 const PrlOptions& opts = {});

// Log-spaced grid of n points in [lo, hi].
std::vector<double> log_spaced(double lo, double hi, std::size_t n);

struct OracleOptions {
    double resolution = 1e-3;   // alpha grid of the returned value
    std::size_t coarse_divisions = 0;  // simplex grid 1/m for the first pass; 0 picks by atom count
    double search_tolerance = 1e-9;
    DivergenceOptions divergence;
};

// Brute-force evaluation of the PRL definition on a finite support of k <= 4
// atoms. Every (nominal weights, member weights, event) triple is a candidate;
// the search runs a dense simplex grid over nominal x member weights for each
// of the 2^k events, then refines around the best candidate with a shrinking
// full-stencil grid. Returns the infimum nominal mass of an event that some
// ball member pushes above eps, floored to the resolution grid. Only the
// nominal's atom count is used; its weights are one point of the search.
double prl_bruteforce_oracle(const AmbiguitySet& set, double eps, const OracleOptions& opts = {});

struct SoundnessReport {
    std::size_t members_in_ball = 0;
    std::size_t events_checked = 0;
    std::size_t violations = 0;
    double max_excess = 0.0;  // largest P(E) - eps among events with Phat(E) <= eps_hat
};

// Checks the implication Phat(E) <= eps_hat  =>  P(E) <= eps for the set's own
// discrete nominal, every event, and every ball member on a simplex grid of
// step 1/divisions.
SoundnessReport prl_soundness_check(const AmbiguitySet& set, double eps, double eps_hat, std::size_t divisions,
                                    const DivergenceOptions& opts = {});

// All weight vectors (i_1, ..., i_k) / m with nonnegative integers summing to m.
std::vector<std::vector<double>> simplex_grid(std::size_t k, std::size_t m);

}  // namespace drrisk

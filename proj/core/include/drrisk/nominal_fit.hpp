#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "drrisk/discrepancy.hpp"
#include "drrisk/distributions.hpp"
#include "drrisk/prl.hpp"

namespace drrisk {

struct GaussianFamily {
    std::vector<Gaussian1> members;
};

// Equally spaced n_mu x n_sigma grid with endpoints included.
GaussianFamily make_family_grid(double mu_lo, double mu_hi, double sigma_lo, double sigma_hi, std::size_t n_mu,
                                std::size_t n_sigma);

// count means ~ U[mu_lo, mu_hi] followed by count standard deviations
// ~ U[sigma_lo, sigma_hi], drawn exactly as numpy's legacy RandomState(seed)
// would. Seed 0 with count 25 on [-1,1] x [1,2] is the comparison family.
GaussianFamily make_family_uniform_draws(std::uint32_t seed, std::size_t count, double mu_lo, double mu_hi,
                                         double sigma_lo, double sigma_hi);

GaussianFamily comparison_family();

struct FitOptions {
    DivergenceOptions divergence;
    // Trapezoid grid for kinds without a closed form.
    std::size_t grid_points = 20001;
    double tail_sigmas = 10.0;
    // Coarse scan resolution; the best `restarts` scan points seed the simplex runs.
    std::size_t scan_mu = 21;
    std::size_t scan_sigma = 21;
    std::size_t restarts = 9;
    double tolerance = 1e-6;
    // Upper limit on sigma_hat. RVD needs sigma_hat >= max member sigma.
    double sigma_hat_max = std::numeric_limits<double>::infinity();
    unsigned threads = 0;
};

struct FitResult {
    Gaussian1 nominal{0.0, 1.0};
    double radius = 0.0;
    std::vector<double> achieved;  // rho(member_i, nominal)
    std::size_t evaluations = 0;
};

// Minimax nominal: argmin over (mu_hat, sigma_hat) of max_i rho(member_i, N(mu_hat, sigma_hat)).
// RVD uses sigma_hat = max_i sigma_i + s^2 so dominance holds for every candidate.
FitResult fit_nominal(DiscrepancyKind kind, const GaussianFamily& family, const FitOptions& opts = {});

// max_i rho(member_i, nominal); +infinity where some distance is unbounded.
double minimax_objective(DiscrepancyKind kind, const GaussianFamily& family, const Gaussian1& nominal,
                         const FitOptions& opts = {});

struct ComparisonRow {
    DiscrepancyKind kind;
    FitResult fit;
    PrlResult prl;
};

// One fitted nominal per discrepancy kind plus its PRL at eps.
std::vector<ComparisonRow> comparison_table(const GaussianFamily& family, double eps, const FitOptions& opts = {},
                                            const PrlOptions& prl_opts = {});

}  // namespace drrisk

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "drrisk/distributions.hpp"

namespace drrisk {

enum class DiscrepancyKind { Rvd, KullbackLeibler, Hellinger, ChiSquared, TotalVariation };

inline constexpr std::array<DiscrepancyKind, 5> kAllDiscrepancyKinds = {
    DiscrepancyKind::Rvd, DiscrepancyKind::KullbackLeibler, DiscrepancyKind::Hellinger,
    DiscrepancyKind::ChiSquared, DiscrepancyKind::TotalVariation};

// Short identifiers: "rvd", "kl", "hellinger", "chi2", "tv".
std::string_view to_string(DiscrepancyKind kind) noexcept;
std::string_view display_name(DiscrepancyKind kind) noexcept;
// Accepts the short identifiers and a few long spellings; throws InvalidArgument.
DiscrepancyKind parse_discrepancy_kind(std::string_view text);

// Which density divides the squared difference in the chi-squared integral.
//   Nominal: int (f_P - f_Phat)^2 / f_Phat   (default)
//   Member:  int (f_P - f_Phat)^2 / f_P
enum class ChiSquaredWeight { Nominal, Member };

std::string_view to_string(ChiSquaredWeight w) noexcept;
ChiSquaredWeight parse_chi_squared_weight(std::string_view text);

struct DivergenceOptions {
    ChiSquaredWeight chi_weight = ChiSquaredWeight::Nominal;
};

// Uniform grid of n >= 2 points on [lo, hi].
struct Grid1 {
    double lo;
    double hi;
    std::size_t n;

    Grid1(double lo, double hi, std::size_t n);
    double step() const noexcept { return (hi - lo) / static_cast<double>(n - 1); }
    double at(std::size_t i) const noexcept { return i + 1 == n ? hi : lo + step() * static_cast<double>(i); }
};

// Per-dimension grids spanning both bounding boxes (Gaussians cut at +-10 sd).
// n points per dimension; n = 0 picks 20001 in 1-D and 1001 otherwise.
std::vector<Grid1> default_grids(const Distribution& p, const Distribution& phat, std::size_t n = 0);

// sup f_P / f_Phat for Gaussians. Equal means reduce to sqrt(det Sigma_hat / det Sigma).
// Throws DominanceViolation unless Sigma^{-1} - Sigma_hat^{-1} is positive definite
// (identical inputs return 1).
double rvd_gaussian_nd(const GaussianNd& p, const GaussianNd& phat);
double rvd_gaussian_1d(const Gaussian1& p, const Gaussian1& phat);

// Grid supremum of the density ratio over points where f_Phat > 0, refined by
// coordinate-wise golden-section search around the best grid point.
// Throws SupportViolation if a grid point has f_P > 0 and f_Phat = 0.
double rvd_numeric(const Distribution& p, const Distribution& phat, std::span<const Grid1> grids);

// Closed forms for RVD, KL(P || Phat) and the Hellinger distance
// H = sqrt(1/2 int (sqrt f_P - sqrt f_Phat)^2). Other kinds throw Unsupported.
double divergence_gaussian_1d(DiscrepancyKind kind, const Gaussian1& p, const Gaussian1& phat);

// Tensor-product trapezoidal approximation of the defining integral. RVD is
// delegated to rvd_numeric.
double divergence_numeric(DiscrepancyKind kind, const Distribution& p, const Distribution& phat,
                          std::span<const Grid1> grids, const DivergenceOptions& opts = {});

// Trapezoidal divergence from log-densities sampled on a uniform 1-D grid of
// spacing h. -inf marks points outside a support. Lets callers that compare
// many candidates against fixed members reuse the sampled log-densities.
double divergence_from_log_densities(DiscrepancyKind kind, std::span<const double> log_p,
                                     std::span<const double> log_phat, double h,
                                     const DivergenceOptions& opts = {});

// Divergence between two weight vectors on a common finite support. Returns
// +infinity where the functional is unbounded (mass where the reference has none).
double divergence_discrete(DiscrepancyKind kind, std::span<const double> p, std::span<const double> phat,
                           const DivergenceOptions& opts = {});

}  // namespace drrisk

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "drrisk/rng.hpp"

namespace drrisk {

using Point = std::vector<double>;

// Univariate normal N(mu, sigma^2), parameterized by the standard deviation.
class Gaussian1 {
public:
    Gaussian1(double mu, double sigma);

    double mu() const noexcept { return mu_; }
    double sigma() const noexcept { return sigma_; }

    double pdf(double x) const noexcept;
    double log_pdf(double x) const noexcept;
    double cdf(double x) const noexcept;

    friend bool operator==(const Gaussian1&, const Gaussian1&) = default;

private:
    double mu_;
    double sigma_;
};

// Multivariate normal with a symmetric positive definite covariance. The
// Cholesky factor, precision and log-determinant are computed once.
class GaussianNd {
public:
    GaussianNd(Eigen::VectorXd mu, Eigen::MatrixXd sigma);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(mu_.size()); }
    const Eigen::VectorXd& mean() const noexcept { return mu_; }
    const Eigen::MatrixXd& covariance() const noexcept { return sigma_; }
    const Eigen::MatrixXd& precision() const noexcept { return precision_; }
    const Eigen::MatrixXd& cholesky_lower() const noexcept { return chol_; }
    double log_det() const noexcept { return log_det_; }

    double log_pdf(std::span<const double> x) const;

private:
    Eigen::VectorXd mu_;
    Eigen::MatrixXd sigma_;
    Eigen::MatrixXd chol_;
    Eigen::MatrixXd precision_;
    double log_det_ = 0.0;
};

// Axis-aligned box [lo_1, hi_1] x ... x [lo_n, hi_n] with constant density.
class UniformBox {
public:
    UniformBox(std::vector<double> lo, std::vector<double> hi);

    std::size_t dim() const noexcept { return lo_.size(); }
    const std::vector<double>& lo() const noexcept { return lo_; }
    const std::vector<double>& hi() const noexcept { return hi_; }
    double volume() const noexcept { return volume_; }

private:
    std::vector<double> lo_;
    std::vector<double> hi_;
    double volume_ = 1.0;
};

// Uniform on {w : inner < |w_i| <= outer for every i}. The inner edge is
// excluded and the outer edge included.
class RingUniform {
public:
    RingUniform(double inner, double outer, std::size_t dim);

    double inner() const noexcept { return inner_; }
    double outer() const noexcept { return outer_; }
    std::size_t dim() const noexcept { return dim_; }
    double level() const noexcept { return level_; }
    bool contains(std::span<const double> x) const noexcept;

private:
    double inner_;
    double outer_;
    std::size_t dim_;
    double level_ = 0.0;
};

// Finite distribution on distinct atoms; density() returns the point mass.
class DiscreteDist {
public:
    DiscreteDist(std::vector<Point> atoms, std::vector<double> weights);

    std::size_t dim() const noexcept { return atoms_.front().size(); }
    std::size_t size() const noexcept { return atoms_.size(); }
    const std::vector<Point>& atoms() const noexcept { return atoms_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

private:
    std::vector<Point> atoms_;
    std::vector<double> weights_;
};

using Distribution = std::variant<Gaussian1, GaussianNd, UniformBox, RingUniform, DiscreteDist>;

// n points of a common dimension stored row-major.
class Samples {
public:
    Samples() = default;
    Samples(std::size_t dim, std::size_t n) : dim_(dim), data_(dim * n) {}

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
    std::span<const double> operator[](std::size_t i) const noexcept {
        return {data_.data() + i * dim_, dim_};
    }
    std::span<double> operator[](std::size_t i) noexcept { return {data_.data() + i * dim_, dim_}; }
    const std::vector<double>& flat() const noexcept { return data_; }

    friend bool operator==(const Samples&, const Samples&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

std::size_t dimension(const Distribution& d) noexcept;

// f_d(x); zero outside the support. Throws DimensionMismatch.
double density(const Distribution& d, std::span<const double> x);
// log f_d(x); -infinity outside the support.
double log_density(const Distribution& d, std::span<const double> x);
bool support_contains(const Distribution& d, std::span<const double> x);

// n i.i.d. draws; the seed fully determines the output.
Samples sample(const Distribution& d, std::uint64_t seed, std::size_t n);
// One draw written into out (size must equal dimension(d)).
void sample_point(const Distribution& d, Rng& rng, std::span<double> out);

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;
};

// Region holding the support; Gaussians are cut at mean +- tail_sigmas std devs.
Box bounding_box(const Distribution& d, double tail_sigmas = 10.0);

// Mini-grammar text form, e.g. "gauss:0,1" or "ring:0.1,0.2,2".
std::string describe(const Distribution& d);

}  // namespace drrisk

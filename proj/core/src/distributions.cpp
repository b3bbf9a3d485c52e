#include "drrisk/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "drrisk/errors.hpp"
#include "drrisk/format.hpp"

namespace drrisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

void require_dim(std::size_t expected, std::size_t got) {
    if (expected != got) {
        throw DimensionMismatch("point has dimension " + std::to_string(got) + ", distribution has " +
                                std::to_string(expected));
    }
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

// --- Gaussian1 ---------------------------------------------------------------

Gaussian1::Gaussian1(double mu, double sigma) : mu_(mu), sigma_(sigma) {
    if (!std::isfinite(mu)) throw InvalidArgument("Gaussian1: mean must be finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("Gaussian1: sigma must be > 0");
}

double Gaussian1::log_pdf(double x) const noexcept {
    const double z = (x - mu_) / sigma_;
    return -0.5 * z * z - std::log(sigma_) - kLogSqrt2Pi;
}

double Gaussian1::pdf(double x) const noexcept {
    const double z = (x - mu_) / sigma_;
    return std::exp(-0.5 * z * z) / (sigma_ * std::sqrt(2.0 * std::numbers::pi));
}

double Gaussian1::cdf(double x) const noexcept {
    return 0.5 * std::erfc(-(x - mu_) / (sigma_ * std::numbers::sqrt2));
}

// --- GaussianNd --------------------------------------------------------------

GaussianNd::GaussianNd(Eigen::VectorXd mu, Eigen::MatrixXd sigma) : mu_(std::move(mu)), sigma_(std::move(sigma)) {
    const auto n = mu_.size();
    if (n == 0) throw InvalidArgument("GaussianNd: empty mean");
    if (sigma_.rows() != n || sigma_.cols() != n) {
        throw DimensionMismatch("GaussianNd: covariance must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (!mu_.allFinite() || !sigma_.allFinite()) throw InvalidArgument("GaussianNd: non-finite parameters");
    const double scale = std::max(1.0, sigma_.cwiseAbs().maxCoeff());
    if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InvalidArgument("GaussianNd: covariance must be symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(sigma_);
    if (llt.info() != Eigen::Success) throw InvalidArgument("GaussianNd: covariance is not positive definite");
    chol_ = llt.matrixL();
    log_det_ = 2.0 * chol_.diagonal().array().log().sum();
    precision_ = llt.solve(Eigen::MatrixXd::Identity(n, n));
}

double GaussianNd::log_pdf(std::span<const double> x) const {
    require_dim(dim(), x.size());
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    const Eigen::VectorXd z = chol_.triangularView<Eigen::Lower>().solve(xv - mu_);
    return -0.5 * z.squaredNorm() - 0.5 * log_det_ - static_cast<double>(dim()) * kLogSqrt2Pi;
}

// --- UniformBox --------------------------------------------------------------

UniformBox::UniformBox(std::vector<double> lo, std::vector<double> hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.empty()) throw InvalidArgument("UniformBox: empty bounds");
    if (lo_.size() != hi_.size()) throw DimensionMismatch("UniformBox: lo and hi differ in length");
    for (std::size_t i = 0; i < lo_.size(); ++i) {
        if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i]) || !(lo_[i] < hi_[i])) {
            throw InvalidArgument("UniformBox: need finite lo[i] < hi[i]");
        }
        volume_ *= hi_[i] - lo_[i];
    }
}

// --- RingUniform -------------------------------------------------------------

RingUniform::RingUniform(double inner, double outer, std::size_t dim) : inner_(inner), outer_(outer), dim_(dim) {
    if (!(inner >= 0.0) || !std::isfinite(inner)) throw InvalidArgument("RingUniform: inner must be >= 0");
    if (!(outer > inner) || !std::isfinite(outer)) throw InvalidArgument("RingUniform: outer must exceed inner");
    if (dim == 0) throw InvalidArgument("RingUniform: dim must be >= 1");
    level_ = 1.0 / std::pow(2.0 * (outer - inner), static_cast<double>(dim));
}

bool RingUniform::contains(std::span<const double> x) const noexcept {
    return std::all_of(x.begin(), x.end(), [&](double v) {
        const double a = std::abs(v);
        return a > inner_ && a <= outer_;
    });
}

// --- DiscreteDist ------------------------------------------------------------

DiscreteDist::DiscreteDist(std::vector<Point> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
    if (atoms_.empty()) throw InvalidArgument("DiscreteDist: no atoms");
    if (atoms_.size() != weights_.size()) throw DimensionMismatch("DiscreteDist: atoms and weights differ in length");
    const std::size_t d = atoms_.front().size();
    if (d == 0) throw InvalidArgument("DiscreteDist: zero-dimensional atoms");
    for (const auto& a : atoms_) {
        if (a.size() != d) throw DimensionMismatch("DiscreteDist: atoms of mixed dimension");
    }
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("DiscreteDist: weights must be >= 0");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("DiscreteDist: weights must sum to 1");
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
            if (atoms_[i] == atoms_[j]) throw InvalidArgument("DiscreteDist: atoms must be distinct");
        }
    }
}

// --- free functions ----------------------------------------------------------

std::size_t dimension(const Distribution& d) noexcept {
    return std::visit(overloaded{
                          [](const Gaussian1&) -> std::size_t { return 1; },
                          [](const auto& x) -> std::size_t { return x.dim(); },
                      },
                      d);
}

double log_density(const Distribution& d, std::span<const double> x) {
    require_dim(dimension(d), x.size());
    return std::visit(overloaded{
                          [&](const Gaussian1& g) { return g.log_pdf(x[0]); },
                          [&](const GaussianNd& g) { return g.log_pdf(x); },
                          [&](const UniformBox& b) {
                              for (std::size_t i = 0; i < x.size(); ++i) {
                                  if (!(x[i] >= b.lo()[i] && x[i] <= b.hi()[i])) return -kInf;
                              }
                              return -std::log(b.volume());
                          },
                          [&](const RingUniform& r) { return r.contains(x) ? std::log(r.level()) : -kInf; },
                          [&](const DiscreteDist& dd) {
                              for (std::size_t i = 0; i < dd.size(); ++i) {
                                  if (std::equal(x.begin(), x.end(), dd.atoms()[i].begin())) {
                                      return dd.weights()[i] > 0.0 ? std::log(dd.weights()[i]) : -kInf;
                                  }
                              }
                              return -kInf;
                          },
                      },
                      d);
}

double density(const Distribution& d, std::span<const double> x) {
    require_dim(dimension(d), x.size());
    return std::visit(overloaded{
                          [&](const Gaussian1& g) { return g.pdf(x[0]); },
                          [&](const GaussianNd& g) { return std::exp(g.log_pdf(x)); },
                          [&](const UniformBox& b) {
                              for (std::size_t i = 0; i < x.size(); ++i) {
                                  if (!(x[i] >= b.lo()[i] && x[i] <= b.hi()[i])) return 0.0;
                              }
                              return 1.0 / b.volume();
                          },
                          [&](const RingUniform& r) { return r.contains(x) ? r.level() : 0.0; },
                          [&](const DiscreteDist& dd) {
                              for (std::size_t i = 0; i < dd.size(); ++i) {
                                  if (std::equal(x.begin(), x.end(), dd.atoms()[i].begin())) return dd.weights()[i];
                              }
                              return 0.0;
                          },
                      },
                      d);
}

bool support_contains(const Distribution& d, std::span<const double> x) {
    return density(d, x) > 0.0;
}

void sample_point(const Distribution& d, Rng& rng, std::span<double> out) {
    require_dim(dimension(d), out.size());
    std::visit(overloaded{
                   [&](const Gaussian1& g) { out[0] = g.mu() + g.sigma() * rng.normal(); },
                   [&](const GaussianNd& g) {
                       const auto n = static_cast<Eigen::Index>(g.dim());
                       Eigen::VectorXd z(n);
                       for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
                       const Eigen::VectorXd x = g.mean() + g.cholesky_lower() * z;
                       std::copy(x.data(), x.data() + n, out.begin());
                   },
                   [&](const UniformBox& b) {
                       for (std::size_t i = 0; i < out.size(); ++i) out[i] = rng.uniform(b.lo()[i], b.hi()[i]);
                   },
                   [&](const RingUniform& r) {
                       for (auto& v : out) {
                           const double sign = (rng() >> 63) != 0 ? -1.0 : 1.0;
                           // outer - u*(outer - inner) with u in [0,1) lands in (inner, outer].
                           const double mag = r.outer() - rng.uniform01() * (r.outer() - r.inner());
                           v = sign * mag;
                       }
                   },
                   [&](const DiscreteDist& dd) {
                       const double u = rng.uniform01();
                       double acc = 0.0;
                       std::size_t pick = dd.size() - 1;
                       for (std::size_t i = 0; i < dd.size(); ++i) {
                           acc += dd.weights()[i];
                           if (u < acc && dd.weights()[i] > 0.0) {
                               pick = i;
                               break;
                           }
                       }
                       std::copy(dd.atoms()[pick].begin(), dd.atoms()[pick].end(), out.begin());
                   },
               },
               d);
}

Samples sample(const Distribution& d, std::uint64_t seed, std::size_t n) {
    Samples out(dimension(d), n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) sample_point(d, rng, out[i]);
    return out;
}

Box bounding_box(const Distribution& d, double tail_sigmas) {
    return std::visit(overloaded{
                          [&](const Gaussian1& g) {
                              return Box{{g.mu() - tail_sigmas * g.sigma()}, {g.mu() + tail_sigmas * g.sigma()}};
                          },
                          [&](const GaussianNd& g) {
                              Box b;
                              for (std::size_t i = 0; i < g.dim(); ++i) {
                                  const auto k = static_cast<Eigen::Index>(i);
                                  const double s = std::sqrt(g.covariance()(k, k));
                                  b.lo.push_back(g.mean()[k] - tail_sigmas * s);
                                  b.hi.push_back(g.mean()[k] + tail_sigmas * s);
                              }
                              return b;
                          },
                          [](const UniformBox& u) { return Box{u.lo(), u.hi()}; },
                          [](const RingUniform& r) {
                              return Box{std::vector<double>(r.dim(), -r.outer()), std::vector<double>(r.dim(), r.outer())};
                          },
                          [](const DiscreteDist& dd) {
                              Box b{dd.atoms().front(), dd.atoms().front()};
                              for (const auto& a : dd.atoms()) {
                                  for (std::size_t i = 0; i < a.size(); ++i) {
                                      b.lo[i] = std::min(b.lo[i], a[i]);
                                      b.hi[i] = std::max(b.hi[i], a[i]);
                                  }
                              }
                              return b;
                          },
                      },
                      d);
}

std::string describe(const Distribution& d) {
    auto join = [](const auto& values) {
        std::string s;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) s += ',';
            s += format_double(values[i]);
        }
        return s;
    };
    return std::visit(overloaded{
                          [](const Gaussian1& g) { return "gauss:" + format_double(g.mu()) + "," + format_double(g.sigma()); },
                          [&](const GaussianNd& g) {
                              std::vector<double> mu(g.mean().data(), g.mean().data() + g.mean().size());
                              std::string s = "gaussnd:{\"mu\":[" + join(mu) + "],\"sigma\":[";
                              for (Eigen::Index r = 0; r < g.covariance().rows(); ++r) {
                                  if (r) s += ',';
                                  std::vector<double> row(static_cast<std::size_t>(g.covariance().cols()));
                                  for (Eigen::Index c = 0; c < g.covariance().cols(); ++c) {
                                      row[static_cast<std::size_t>(c)] = g.covariance()(r, c);
                                  }
                                  s += "[" + join(row) + "]";
                              }
                              return s + "]}";
                          },
                          [&](const UniformBox& b) { return "box:" + join(b.lo()) + "," + join(b.hi()); },
                          [](const RingUniform& r) {
                              return "ring:" + format_double(r.inner()) + "," + format_double(r.outer()) + "," +
                                     std::to_string(r.dim());
                          },
                          [&](const DiscreteDist& dd) {
                              std::string s = "discrete:";
                              for (std::size_t i = 0; i < dd.size(); ++i) {
                                  if (i) s += ';';
                                  s += join(dd.atoms()[i]) + "@" + format_double(dd.weights()[i]);
                              }
                              return s;
                          },
                      },
                      d);
}

}  // namespace drrisk

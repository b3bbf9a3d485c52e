#include "drrisk/rmpc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

#include "drrisk/errors.hpp"
#include "drrisk/parallel.hpp"
#include "drrisk/scenario_bounds.hpp"

namespace drrisk {

namespace {

constexpr std::size_t kNoScenario = std::numeric_limits<std::size_t>::max();

// Nominal (w = 0) prediction maps: x_k = P_k x0 + G_k c, u_k = K P_k x0 + U_k c.
struct Prediction {
    std::vector<Eigen::Matrix2d> P;
    std::vector<Eigen::MatrixXd> G;
    std::vector<Eigen::RowVectorXd> U;
};

Prediction predict(const LinearSystem& sys, std::size_t horizon) {
    const Eigen::Index n = static_cast<Eigen::Index>(horizon);
    const Eigen::Matrix2d phi = sys.closed_loop();
    Prediction pr;
    pr.P.push_back(Eigen::Matrix2d::Identity());
    pr.G.push_back(Eigen::MatrixXd::Zero(2, n));
    for (std::size_t k = 0; k < horizon; ++k) {
        Eigen::RowVectorXd u = sys.K * pr.G[k];
        u(static_cast<Eigen::Index>(k)) += 1.0;
        pr.U.push_back(u);
        Eigen::MatrixXd g = phi * pr.G[k];
        g.col(static_cast<Eigen::Index>(k)) += sys.B;
        pr.G.push_back(g);
        pr.P.push_back(phi * pr.P[k]);
    }
    return pr;
}

// Disturbance contribution to x_1..x_N for one scenario.
void disturbance_effect(const Eigen::Matrix2d& phi, std::span<const double> w, std::size_t horizon,
                        std::vector<Eigen::Vector2d>& out) {
    out.resize(horizon + 1);
    out[0].setZero();
    const bool per_step = w.size() == 2 * horizon && horizon > 1;
    for (std::size_t k = 0; k < horizon; ++k) {
        const std::size_t o = per_step ? 2 * k : 0;
        out[k + 1] = phi * out[k] + Eigen::Vector2d(w[o], w[o + 1]);
    }
}

std::optional<ScenarioSolution> try_solve(const ScenarioProgram& pr, const std::vector<std::size_t>& subset_of) {
    const Eigen::Index n = pr.hessian.rows();
    const std::size_t m = subset_of.size();
    const std::size_t max_active = std::min<std::size_t>(static_cast<std::size_t>(n), m);
    std::vector<std::size_t> pick;

    auto attempt = [&](const std::vector<std::size_t>& act) -> std::optional<ScenarioSolution> {
        const Eigen::Index k = static_cast<Eigen::Index>(act.size());
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
        Eigen::VectorXd rhs(n + k);
        kkt.topLeftCorner(n, n) = pr.hessian;
        rhs.head(n) = -pr.linear;
        for (Eigen::Index i = 0; i < k; ++i) {
            const auto row = static_cast<Eigen::Index>(subset_of[act[static_cast<std::size_t>(i)]]);
            kkt.block(n + i, 0, 1, n) = pr.a.row(row);
            kkt.block(0, n + i, n, 1) = pr.a.row(row).transpose();
            rhs(n + i) = pr.b(row);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        if (lu.rank() < n + k) return std::nullopt;
        const Eigen::VectorXd sol = lu.solve(rhs);
        const Eigen::VectorXd c = sol.head(n);
        for (Eigen::Index i = 0; i < k; ++i) {
            if (sol(n + i) < -1e-10) return std::nullopt;
        }
        for (std::size_t j : subset_of) {
            const auto row = static_cast<Eigen::Index>(j);
            if (pr.a.row(row).dot(c) - pr.b(row) > 1e-9 * (1.0 + std::abs(pr.b(row)))) return std::nullopt;
        }
        ScenarioSolution s;
        s.c = c;
        s.cost = pr.cost(c);
        for (std::size_t i : act) s.active.push_back(subset_of[i]);
        return s;
    };

    for (std::size_t size = 0; size <= max_active; ++size) {
        // Lexicographic combinations of `size` indices out of m.
        pick.resize(size);
        for (std::size_t i = 0; i < size; ++i) pick[i] = i;
        for (;;) {
            if (auto s = attempt(pick)) return s;
            std::size_t i = size;
            while (i > 0 && pick[i - 1] == m - size + i - 1) --i;
            if (i == 0) break;
            ++pick[i - 1];
            for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
        }
    }
    return std::nullopt;
}

Samples drop_row(const Samples& s, std::size_t skip) {
    Samples out(s.dim(), s.size() - 1);
    std::size_t r = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i == skip) continue;
        std::copy(s[i].begin(), s[i].end(), out[r++].begin());
    }
    return out;
}

Samples draw_scenarios(const RmpcExperiment& exp, std::uint64_t seed, std::size_t n) {
    const std::size_t width = exp.scenario_width();
    Samples raw = sample(exp.nominal, seed, n * (width / 2));
    Samples out(width, n);
    std::copy(raw.flat().begin(), raw.flat().end(), out[0].begin());
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

void ConstraintSet::validate() const {
    for (int i = 0; i < 2; ++i) {
        if (std::isnan(state_lo(i)) || std::isnan(state_hi(i)) || !(state_lo(i) < state_hi(i))) {
            throw InvalidArgument("ConstraintSet: state_lo must be below state_hi");
        }
    }
    if (std::isnan(input_lo) || std::isnan(input_hi) || !(input_lo < input_hi)) {
        throw InvalidArgument("ConstraintSet: input_lo must be below input_hi");
    }
}

void RmpcExperiment::validate() const {
    constraints.validate();
    if (horizon < 1) throw InvalidArgument("RmpcExperiment: horizon must be >= 1");
    if (n_scenarios < support_dim()) throw InvalidArgument("RmpcExperiment: n_scenarios must be >= horizon");
    if (dimension(nominal) != 2 || dimension(truth) != 2) {
        throw DimensionMismatch("RmpcExperiment: disturbance distributions must be 2-dimensional");
    }
    if (!(m_rvd >= 1.0)) throw InvalidArgument("RmpcExperiment: m_rvd must be >= 1");
    if (n_trials < 1 || n_eval < 1) throw InvalidArgument("RmpcExperiment: n_trials and n_eval must be >= 1");
    if (!(cost.R > 0.0)) throw InvalidArgument("RmpcExperiment: R must be > 0");
    if ((cost.Q - cost.Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(cost.Q).eigenvalues().minCoeff() < -1e-12) {
        throw InvalidArgument("RmpcExperiment: Q must be symmetric positive semidefinite");
    }
    if (histogram_bins < 1 || !(histogram_max > 0.0)) throw InvalidArgument("RmpcExperiment: bad histogram settings");
}

Trajectory rollout(const LinearSystem& sys, const Eigen::Vector2d& x0, std::span<const double> c,
                   std::span<const double> w) {
    const std::size_t n = c.size();
    if (w.size() != 2 && w.size() != 2 * n) throw DimensionMismatch("rollout: w must have 2 or 2*N entries");
    Trajectory t;
    Eigen::Vector2d x = x0;
    for (std::size_t k = 0; k < n; ++k) {
        const double u = sys.K.dot(x) + c[k];
        const std::size_t o = w.size() == 2 ? 0 : 2 * k;
        x = sys.A * x + sys.B * u + Eigen::Vector2d(w[o], w[o + 1]);
        t.inputs.push_back(u);
        t.states.push_back(x);
    }
    return t;
}

bool violates(const ConstraintSet& cons, const Trajectory& traj, double margin) {
    for (const auto& x : traj.states) {
        for (int i = 0; i < 2; ++i) {
            if (x(i) > cons.state_hi(i) + margin || x(i) < cons.state_lo(i) - margin) return true;
        }
    }
    for (double u : traj.inputs) {
        if (u > cons.input_hi + margin || u < cons.input_lo - margin) return true;
    }
    return false;
}

std::string ConstraintTag::name() const {
    std::string s;
    switch (kind) {
        case Kind::StateUpper: s = "x" + std::to_string(component) + "[" + std::to_string(step) + "]<=hi"; break;
        case Kind::StateLower: s = "x" + std::to_string(component) + "[" + std::to_string(step) + "]>=lo"; break;
        case Kind::InputUpper: s = "u[" + std::to_string(step) + "]<=hi"; break;
        case Kind::InputLower: s = "u[" + std::to_string(step) + "]>=lo"; break;
    }
    if (scenario != kNoScenario) s += " (scenario " + std::to_string(scenario) + ")";
    return s;
}

double ScenarioProgram::cost(const Eigen::VectorXd& c) const {
    return c.dot(hessian * c) + 2.0 * linear.dot(c) + constant;
}

double ScenarioProgram::max_violation(const Eigen::VectorXd& c) const {
    if (a.rows() == 0) return -std::numeric_limits<double>::infinity();
    return (a * c - b).maxCoeff();
}

ScenarioProgram build_scenario_program(const RmpcExperiment& exp, const Samples& scenarios) {
    exp.constraints.validate();
    const std::size_t h = exp.horizon;
    if (scenarios.size() == 0) throw InvalidArgument("build_scenario_program: no scenarios");
    if (scenarios.dim() != exp.scenario_width()) throw DimensionMismatch("build_scenario_program: scenario width");
    const auto& sys = exp.system;
    const Prediction pr = predict(sys, h);
    const Eigen::Index n = static_cast<Eigen::Index>(h);

    ScenarioProgram prog;
    prog.hessian = Eigen::MatrixXd::Zero(n, n);
    prog.linear = Eigen::VectorXd::Zero(n);
    prog.constant = exp.x0.dot(exp.cost.Q * exp.x0);
    for (std::size_t k = 0; k < h; ++k) {
        const double u_free = sys.K.dot(pr.P[k] * exp.x0);
        prog.hessian += exp.cost.R * pr.U[k].transpose() * pr.U[k];
        prog.linear += exp.cost.R * u_free * pr.U[k].transpose();
        prog.constant += exp.cost.R * u_free * u_free;
        const Eigen::Vector2d x_free = pr.P[k + 1] * exp.x0;
        prog.hessian += pr.G[k + 1].transpose() * exp.cost.Q * pr.G[k + 1];
        prog.linear += pr.G[k + 1].transpose() * exp.cost.Q * x_free;
        prog.constant += x_free.dot(exp.cost.Q * x_free);
    }

    // Extreme disturbance effects per constraint type.
    const Eigen::Matrix2d phi = sys.closed_loop();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::array<double, 2>> st_max(h + 1, {-inf, -inf}), st_min(h + 1, {inf, inf});
    std::vector<std::array<std::size_t, 2>> st_max_i(h + 1, {kNoScenario, kNoScenario}),
        st_min_i(h + 1, {kNoScenario, kNoScenario});
    std::vector<double> in_max(h, -inf), in_min(h, inf);
    std::vector<std::size_t> in_max_i(h, kNoScenario), in_min_i(h, kNoScenario);
    std::vector<Eigen::Vector2d> e;
    for (std::size_t j = 0; j < scenarios.size(); ++j) {
        disturbance_effect(phi, scenarios[j], h, e);
        for (std::size_t k = 1; k <= h; ++k) {
            for (int i = 0; i < 2; ++i) {
                if (e[k](i) > st_max[k][i]) st_max[k][i] = e[k](i), st_max_i[k][i] = j;
                if (e[k](i) < st_min[k][i]) st_min[k][i] = e[k](i), st_min_i[k][i] = j;
            }
        }
        for (std::size_t k = 1; k < h; ++k) {
            const double v = sys.K.dot(e[k]);
            if (v > in_max[k]) in_max[k] = v, in_max_i[k] = j;
            if (v < in_min[k]) in_min[k] = v, in_min_i[k] = j;
        }
    }
    in_max[0] = in_min[0] = 0.0;

    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    auto add = [&](const Eigen::RowVectorXd& row, double bound, ConstraintTag tag) {
        if (!std::isfinite(bound)) return;
        rows.push_back(row);
        rhs.push_back(bound);
        prog.tags.push_back(tag);
    };
    using Kind = ConstraintTag::Kind;
    const auto& cons = exp.constraints;
    for (std::size_t k = 0; k < h; ++k) {
        const double u_free = sys.K.dot(pr.P[k] * exp.x0);
        add(pr.U[k], cons.input_hi - u_free - in_max[k], {Kind::InputUpper, k, 0, in_max_i[k]});
        add(-pr.U[k], u_free + in_min[k] - cons.input_lo, {Kind::InputLower, k, 0, in_min_i[k]});
    }
    for (std::size_t k = 1; k <= h; ++k) {
        const Eigen::Vector2d x_free = pr.P[k] * exp.x0;
        for (int i = 0; i < 2; ++i) {
            const auto comp = static_cast<std::size_t>(i);
            add(pr.G[k].row(i), cons.state_hi(i) - x_free(i) - st_max[k][comp],
                {Kind::StateUpper, k, comp, st_max_i[k][comp]});
            add(-pr.G[k].row(i), x_free(i) + st_min[k][comp] - cons.state_lo(i),
                {Kind::StateLower, k, comp, st_min_i[k][comp]});
        }
    }
    prog.a.resize(static_cast<Eigen::Index>(rows.size()), n);
    prog.b.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        prog.a.row(static_cast<Eigen::Index>(r)) = rows[r];
        prog.b(static_cast<Eigen::Index>(r)) = rhs[r];
    }
    return prog;
}

ScenarioSolution solve_program(const ScenarioProgram& program) {
    std::vector<std::size_t> all(static_cast<std::size_t>(program.a.rows()));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    if (auto s = try_solve(program, all)) return *s;

    // Helly: some n + 1 constraints already have no common point.
    const std::size_t n = static_cast<std::size_t>(program.hessian.rows());
    std::string blocking;
    for (std::size_t size = 1; size <= std::min(n + 1, all.size()) && blocking.empty(); ++size) {
        std::vector<std::size_t> pick(size);
        for (std::size_t i = 0; i < size; ++i) pick[i] = i;
        for (;;) {
            if (!try_solve(program, pick)) {
                for (std::size_t i : pick) {
                    blocking += (blocking.empty() ? "" : ", ") + program.tags[i].name();
                }
                break;
            }
            std::size_t i = size;
            while (i > 0 && pick[i - 1] == all.size() - size + i - 1) --i;
            if (i == 0) break;
            ++pick[i - 1];
            for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
        }
    }
    throw Infeasible("scenario program infeasible; blocking constraints: " +
                     (blocking.empty() ? std::string("unidentified") : blocking));
}

ScenarioSolution solve_scenario_program(const RmpcExperiment& exp, const Samples& scenarios) {
    return solve_program(build_scenario_program(exp, scenarios));
}

std::vector<std::size_t> support_scenarios(const RmpcExperiment& exp, const Samples& scenarios,
                                           const ScenarioSolution& solution) {
    const ScenarioProgram prog = build_scenario_program(exp, scenarios);
    std::vector<std::size_t> candidates;
    for (std::size_t idx : solution.active) {
        const std::size_t j = prog.tags[idx].scenario;
        if (j != kNoScenario && std::find(candidates.begin(), candidates.end(), j) == candidates.end()) {
            candidates.push_back(j);
        }
    }
    std::sort(candidates.begin(), candidates.end());
    std::vector<std::size_t> support;
    if (scenarios.size() < 2) return candidates;
    for (std::size_t j : candidates) {
        const ScenarioSolution reduced = solve_scenario_program(exp, drop_row(scenarios, j));
        if ((reduced.c - solution.c).norm() > 1e-9 * (1.0 + solution.c.norm())) support.push_back(j);
    }
    return support;
}

double violation_probability(const RmpcExperiment& exp, const Eigen::VectorXd& c, const Distribution& dist,
                             std::size_t n_eval, std::uint64_t seed) {
    if (n_eval < 1) throw InvalidArgument("violation_probability: n_eval must be >= 1");
    if (dimension(dist) != 2) throw DimensionMismatch("violation_probability: distribution must be 2-dimensional");
    const std::size_t h = exp.horizon;
    if (static_cast<std::size_t>(c.size()) != h) throw DimensionMismatch("violation_probability: c has wrong length");
    const auto& sys = exp.system;
    const auto& cons = exp.constraints;
    const Eigen::Matrix2d phi = sys.closed_loop();
    constexpr double margin = 1e-12;

    // Nominal trajectory once; each draw only adds its disturbance response.
    std::vector<Eigen::Vector2d> xbar(h + 1);
    std::vector<double> ubar(h);
    xbar[0] = exp.x0;
    for (std::size_t k = 0; k < h; ++k) {
        ubar[k] = sys.K.dot(xbar[k]) + c(static_cast<Eigen::Index>(k));
        xbar[k + 1] = sys.A * xbar[k] + sys.B * ubar[k];
    }
    Rng rng(seed);
    std::array<double, 2> w{};
    std::size_t hits = 0;
    for (std::size_t s = 0; s < n_eval; ++s) {
        Eigen::Vector2d e = Eigen::Vector2d::Zero();
        bool bad = ubar[0] > cons.input_hi + margin || ubar[0] < cons.input_lo - margin;
        for (std::size_t k = 0; k < h; ++k) {
            if (k == 0 || exp.iid_per_step) sample_point(dist, rng, w);
            e = phi * e + Eigen::Vector2d(w[0], w[1]);
            const Eigen::Vector2d x = xbar[k + 1] + e;
            for (int i = 0; i < 2; ++i) {
                bad = bad || x(i) > cons.state_hi(i) + margin || x(i) < cons.state_lo(i) - margin;
            }
            if (k + 1 < h) {
                const double u = ubar[k + 1] + sys.K.dot(e);
                bad = bad || u > cons.input_hi + margin || u < cons.input_lo - margin;
            }
        }
        if (bad) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n_eval);
}

Histogram make_histogram(const std::vector<double>& values, std::size_t bins, double max) {
    if (bins < 1 || !(max > 0.0)) throw InvalidArgument("make_histogram: need bins >= 1 and max > 0");
    Histogram hist;
    hist.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) hist.edges[i] = max * static_cast<double>(i) / static_cast<double>(bins);
    hist.counts.assign(bins, 0);
    for (double v : values) {
        if (v > max) {
            ++hist.overflow;
            continue;
        }
        auto b = static_cast<std::size_t>(v / max * static_cast<double>(bins));
        ++hist.counts[std::min(b, bins - 1)];
    }
    return hist;
}

std::vector<double> ExperimentReport::nominal_values() const {
    std::vector<double> v;
    for (const auto& t : trials) {
        if (t.feasible) v.push_back(t.v_nominal);
    }
    return v;
}

std::vector<double> ExperimentReport::truth_values() const {
    std::vector<double> v;
    for (const auto& t : trials) {
        if (t.feasible) v.push_back(t.v_truth);
    }
    return v;
}

ExperimentReport run_experiment(const RmpcExperiment& exp) {
    exp.validate();
    ExperimentReport rep;
    rep.trials.resize(exp.n_trials);
    parallel_for(
        exp.n_trials,
        [&](std::size_t t) {
            TrialResult& r = rep.trials[t];
            r.index = t;
            const Samples scenarios = draw_scenarios(exp, derive_seed(exp.seed, 1, t), exp.n_scenarios);
            ScenarioSolution sol;
            try {
                sol = solve_scenario_program(exp, scenarios);
            } catch (const Infeasible&) {
                r.feasible = false;
                return;
            }
            r.c = sol.c;
            r.support_count = support_scenarios(exp, scenarios, sol).size();
            // Shared evaluation stream: equal distributions give equal estimates.
            const std::uint64_t eval_seed = derive_seed(exp.seed, 2, t);
            r.v_nominal = violation_probability(exp, sol.c, exp.nominal, exp.n_eval, eval_seed);
            r.v_truth = violation_probability(exp, sol.c, exp.truth, exp.n_eval, eval_seed);
        },
        exp.threads);

    for (const auto& t : rep.trials) {
        if (!t.feasible) ++rep.infeasible;
        rep.max_support = std::max(rep.max_support, t.support_count);
    }
    const auto vn = rep.nominal_values();
    const auto vt = rep.truth_values();
    rep.mean_nominal = mean_of(vn);
    rep.se_nominal = standard_error(vn, rep.mean_nominal);
    rep.mean_truth = mean_of(vt);
    rep.se_truth = standard_error(vt, rep.mean_truth);

    const ScenarioParams sp(exp.n_scenarios, exp.support_dim());
    rep.expected_nominal = expected_nominal(sp);
    rep.expected_dr = expected_dr_rvd(sp, exp.m_rvd);
    rep.hist_nominal = make_histogram(vn, exp.histogram_bins, exp.histogram_max);
    rep.hist_truth = make_histogram(vt, exp.histogram_bins, exp.histogram_max);
    constexpr std::size_t kOverlayPoints = 201;
    for (std::size_t i = 0; i < kOverlayPoints; ++i) {
        const double eps = exp.histogram_max * static_cast<double>(i) / static_cast<double>(kOverlayPoints - 1);
        rep.overlays.push_back({eps, beta_density_nominal(sp, eps), dr_density_rvd(sp, exp.m_rvd, eps),
                                two_level_nominal(sp, eps),
                                two_level_dr(sp, DiscrepancyKind::Rvd, exp.m_rvd, eps)});
    }
    return rep;
}

std::vector<double> dominance_grid(double max, std::size_t n) {
    if (n < 1 || !(max > 0.0)) throw InvalidArgument("dominance_grid: need n >= 1 and max > 0");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = max * static_cast<double>(i + 1) / static_cast<double>(n);
    return g;
}

DominanceCheck check_dominance(const std::vector<double>& values, const std::vector<double>& eps_grid,
                               const std::vector<double>& bound, double confidence) {
    if (values.empty()) throw InvalidArgument("check_dominance: no values");
    if (eps_grid.size() != bound.size()) throw DimensionMismatch("check_dominance: grid and bound differ in size");
    DominanceCheck out;
    out.band = dkw_band(confidence, values.size());
    out.max_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        const auto above = std::count_if(values.begin(), values.end(), [&](double v) { return v > eps_grid[i]; });
        const double excess = static_cast<double>(above) / static_cast<double>(values.size()) - bound[i];
        if (excess > out.max_excess) {
            out.max_excess = excess;
            out.worst_eps = eps_grid[i];
        }
    }
    return out;
}

}  // namespace drrisk

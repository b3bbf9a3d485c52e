#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "drrisk/distributions.hpp"

namespace drrisk {

// x+ = A x + B u with u = K x + c.
struct LinearSystem {
    Eigen::Matrix2d A = (Eigen::Matrix2d() << 1.0, 1.0, 0.0, 1.0).finished();
    Eigen::Vector2d B{0.5, 1.0};
    Eigen::RowVector2d K{-0.43, -1.03};

    Eigen::Matrix2d closed_loop() const { return A + B * K; }
};

struct ConstraintSet {
    Eigen::Vector2d state_lo{-0.5, -0.5};
    Eigen::Vector2d state_hi{2.0, 2.0};
    double input_lo = -1.0;
    double input_hi = 1.0;

    void validate() const;
};

struct CostWeights {
    Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();
    double R = 1.0;
};

struct RmpcExperiment {
    LinearSystem system;
    ConstraintSet constraints;
    CostWeights cost;
    std::size_t horizon = 2;
    Eigen::Vector2d x0{1.5, 0.4};
    std::size_t n_scenarios = 1000;
    Distribution nominal = UniformBox({-0.2, -0.2}, {0.2, 0.2});
    Distribution truth = RingUniform(0.1, 0.2, 2);
    double m_rvd = 4.0;
    std::size_t n_trials = 800;
    std::size_t n_eval = 40000;
    std::uint64_t seed = 0;
    // Default: one disturbance per scenario, applied at every step.
    bool iid_per_step = false;
    std::size_t histogram_bins = 100;
    double histogram_max = 0.025;
    unsigned threads = 0;

    // Bound on the number of support constraints: horizon * (number of inputs).
    std::size_t support_dim() const noexcept { return horizon; }
    // Disturbance values per scenario: 2, or 2 * horizon for per-step draws.
    std::size_t scenario_width() const noexcept { return iid_per_step ? 2 * horizon : 2; }
    void validate() const;
};

struct Trajectory {
    std::vector<Eigen::Vector2d> states;  // x_1 .. x_N
    std::vector<double> inputs;           // u_0 .. u_{N-1}
};

// w is one 2-vector applied at every step, or 2 * horizon values (one per step).
Trajectory rollout(const LinearSystem& sys, const Eigen::Vector2d& x0, std::span<const double> c,
                   std::span<const double> w);

// True if any bound is exceeded by more than margin.
bool violates(const ConstraintSet& cons, const Trajectory& traj, double margin = 1e-12);

struct ConstraintTag {
    enum class Kind { StateUpper, StateLower, InputUpper, InputLower };
    Kind kind;
    std::size_t step;       // states: 1..N, inputs: 0..N-1
    std::size_t component;  // state component, 0 for inputs
    std::size_t scenario;   // scenario attaining the tightest bound

    std::string name() const;
};

// Dense QP: minimize c'Hc + 2 g'c + const s.t. A c <= b. Scenario constraints
// of equal type differ only in their right-hand side, so each type keeps its
// tightest scenario.
struct ScenarioProgram {
    Eigen::MatrixXd hessian;
    Eigen::VectorXd linear;
    double constant = 0.0;
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    std::vector<ConstraintTag> tags;

    double cost(const Eigen::VectorXd& c) const;
    // Largest constraint excess; <= 0 when c is feasible.
    double max_violation(const Eigen::VectorXd& c) const;
};

ScenarioProgram build_scenario_program(const RmpcExperiment& exp, const Samples& scenarios);

struct ScenarioSolution {
    Eigen::VectorXd c;
    double cost = 0.0;
    std::vector<std::size_t> active;  // indices into the program's constraints
};

// Exact active-set enumeration over subsets of at most dim(c) constraints in
// size-then-lexicographic order. Throws Infeasible naming a smallest set of
// constraints without a common point.
ScenarioSolution solve_program(const ScenarioProgram& program);

ScenarioSolution solve_scenario_program(const RmpcExperiment& exp, const Samples& scenarios);

// Scenarios whose removal changes the solution (checked by leave-one-out).
std::vector<std::size_t> support_scenarios(const RmpcExperiment& exp, const Samples& scenarios,
                                           const ScenarioSolution& solution);

// Fraction of n_eval fresh disturbances whose rollout violates some bound.
double violation_probability(const RmpcExperiment& exp, const Eigen::VectorXd& c, const Distribution& dist,
                             std::size_t n_eval, std::uint64_t seed);

struct TrialResult {
    std::size_t index = 0;
    bool feasible = true;
    Eigen::VectorXd c;
    std::size_t support_count = 0;
    double v_nominal = 0.0;
    double v_truth = 0.0;
};

struct Histogram {
    std::vector<double> edges;
    std::vector<std::size_t> counts;
    std::size_t overflow = 0;
};

Histogram make_histogram(const std::vector<double>& values, std::size_t bins, double max);

struct OverlayRow {
    double eps;
    double beta_density;
    double dr_density;
    double cdf_bound_nominal;  // two_level_nominal
    double cdf_bound_dr;       // two_level_dr under the RVD ball
};

struct ExperimentReport {
    std::vector<TrialResult> trials;
    std::size_t infeasible = 0;
    std::size_t max_support = 0;
    double mean_nominal = 0.0;
    double se_nominal = 0.0;
    double mean_truth = 0.0;
    double se_truth = 0.0;
    double expected_nominal = 0.0;
    double expected_dr = 0.0;
    Histogram hist_nominal;
    Histogram hist_truth;
    std::vector<OverlayRow> overlays;

    std::vector<double> nominal_values() const;
    std::vector<double> truth_values() const;
};

ExperimentReport run_experiment(const RmpcExperiment& exp);

// max over eps of (empirical survival(eps) - bound(eps)); the bound holds
// within the band when this stays below the DKW half-width.
struct DominanceCheck {
    double max_excess = 0.0;
    double worst_eps = 0.0;
    double band = 0.0;
    bool holds() const noexcept { return max_excess <= band; }
};

DominanceCheck check_dominance(const std::vector<double>& values, const std::vector<double>& eps_grid,
                               const std::vector<double>& bound, double confidence = 0.999);

// 100 points evenly spaced in (0, max].
std::vector<double> dominance_grid(double max, std::size_t n = 100);

// histogram_nominal.csv, histogram_truth.csv, overlays.csv, report.json.
void write_experiment_outputs(const RmpcExperiment& exp, const ExperimentReport& report,
                              const std::filesystem::path& dir);

std::string report_json(const RmpcExperiment& exp, const ExperimentReport& report);

}  // namespace drrisk

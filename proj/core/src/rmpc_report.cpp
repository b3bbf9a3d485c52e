#include <fstream>

#include "json.hpp"

#include "drrisk/errors.hpp"
#include "drrisk/format.hpp"
#include "drrisk/rmpc.hpp"

namespace drrisk {

namespace {

using nlohmann::ordered_json;

ordered_json vec(const Eigen::VectorXd& v) {
    ordered_json a = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

ordered_json matrix(const Eigen::Matrix2d& m) {
    return ordered_json::array({{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}});
}

ordered_json histogram_json(const Histogram& h) {
    return {{"edges", h.edges}, {"counts", h.counts}, {"overflow", h.overflow}};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

std::string histogram_csv(const Histogram& h) {
    std::string s = "bin_lo,bin_hi,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        s += format_double(h.edges[i]) + "," + format_double(h.edges[i + 1]) + "," + std::to_string(h.counts[i]) + "\n";
    }
    return s;
}

}  // namespace

std::string report_json(const RmpcExperiment& exp, const ExperimentReport& rep) {
    ordered_json config = {
        {"A", matrix(exp.system.A)},
        {"B", vec(exp.system.B)},
        {"K", vec(exp.system.K.transpose())},
        {"state_lo", vec(exp.constraints.state_lo)},
        {"state_hi", vec(exp.constraints.state_hi)},
        {"input_lo", exp.constraints.input_lo},
        {"input_hi", exp.constraints.input_hi},
        {"Q", matrix(exp.cost.Q)},
        {"R", exp.cost.R},
        {"horizon", exp.horizon},
        {"x0", vec(exp.x0)},
        {"n_scenarios", exp.n_scenarios},
        {"nominal", describe(exp.nominal)},
        {"truth", describe(exp.truth)},
        {"m_rvd", exp.m_rvd},
        {"n_trials", exp.n_trials},
        {"n_eval", exp.n_eval},
        {"seed", exp.seed},
        {"iid_per_step", exp.iid_per_step},
    };
    ordered_json trials = ordered_json::array();
    for (const auto& t : rep.trials) {
        trials.push_back({{"index", t.index},
                          {"feasible", t.feasible},
                          {"c", t.feasible ? vec(t.c) : ordered_json::array()},
                          {"support_count", t.support_count},
                          {"v_nominal", t.v_nominal},
                          {"v_truth", t.v_truth}});
    }
    ordered_json j = {
        {"config", config},
        {"support_dim", exp.support_dim()},
        {"infeasible_trials", rep.infeasible},
        {"max_support_count", rep.max_support},
        {"mean_nominal", rep.mean_nominal},
        {"se_nominal", rep.se_nominal},
        {"mean_truth", rep.mean_truth},
        {"se_truth", rep.se_truth},
        {"expected_nominal", rep.expected_nominal},
        {"expected_dr_rvd", rep.expected_dr},
        {"histogram_nominal", histogram_json(rep.hist_nominal)},
        {"histogram_truth", histogram_json(rep.hist_truth)},
        {"trials", trials},
    };
    return j.dump(2) + "\n";
}

void write_experiment_outputs(const RmpcExperiment& exp, const ExperimentReport& rep,
                              const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "histogram_nominal.csv", histogram_csv(rep.hist_nominal));
    write_file(dir / "histogram_truth.csv", histogram_csv(rep.hist_truth));
    std::string ov = "eps,beta_density_nominal,dr_density_rvd,two_level_nominal,two_level_dr\n";
    for (const auto& r : rep.overlays) {
        ov += format_double(r.eps) + "," + format_double(r.beta_density) + "," + format_double(r.dr_density) + "," +
              format_double(r.cdf_bound_nominal) + "," + format_double(r.cdf_bound_dr) + "\n";
    }
    write_file(dir / "overlays.csv", ov);
    write_file(dir / "report.json", report_json(exp, rep));
}

}  // namespace drrisk

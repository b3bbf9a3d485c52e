#include "drrisk_cli/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <variant>

#include "CLI11.hpp"
#include "drrisk/discrepancy.hpp"
#include "drrisk/errors.hpp"
#include "drrisk/format.hpp"
#include "drrisk/nominal_fit.hpp"
#include "drrisk/prl.hpp"
#include "drrisk/rmpc.hpp"
#include "drrisk/scenario_bounds.hpp"
#include "json.hpp"

namespace drrisk::cli {

namespace {

using Cell = std::variant<double, long long, std::string>;

// Rows of named columns, rendered as CSV (header line first) or as a JSON
// array of objects.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    std::string csv() const {
        std::string s;
        for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
        s += "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) s += ",";
                std::visit(
                    [&](const auto& v) {
                        using T = std::decay_t<decltype(v)>;
                        if constexpr (std::is_same_v<T, double>) {
                            s += format_double(v);
                        } else if constexpr (std::is_same_v<T, long long>) {
                            s += std::to_string(v);
                        } else {
                            s += v;
                        }
                    },
                    row[i]);
            }
            s += "\n";
        }
        return s;
    }

    std::string json() const {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& row : rows) {
            nlohmann::ordered_json obj = nlohmann::ordered_json::object();
            for (std::size_t i = 0; i < row.size(); ++i) {
                std::visit([&](const auto& v) { obj[columns[i]] = v; }, row[i]);
            }
            arr.push_back(obj);
        }
        return arr.dump(2) + "\n";
    }
};

struct Globals {
    std::uint64_t seed = 0;
    std::string output;
    std::string format = "csv";
    std::string config;
    std::string chi_weight = "nominal";
    unsigned threads = 0;
};

const char* kFooter = R"(Distribution specs:
  gauss:MU,SIGMA                      univariate normal (SIGMA is the std dev)
  gaussnd:{"mu":[..],"sigma":[[..]]}  multivariate normal
  box:LO_1,..,LO_n,HI_1,..,HI_n       uniform on a box
  ring:INNER,OUTER,DIM                uniform on INNER < |w_i| <= OUTER
  discrete:X,Y@W;X,Y@W                finite atoms with weights
Discrepancy kinds: rvd, kl, hellinger, chi2, tv
Exit codes: 0 success, 1 I/O failure, 2 usage or invalid value, 3 domain error
Environment: DRRISK_OUTPUT_DIR sets the default rmpc output directory.
--config FILE reads a JSON object whose keys are long option names.)";

std::string domain_error_name(const DomainError& e) {
    if (dynamic_cast<const DominanceViolation*>(&e)) return "DominanceViolation";
    if (dynamic_cast<const SupportViolation*>(&e)) return "SupportViolation";
    if (dynamic_cast<const Unsupported*>(&e)) return "Unsupported";
    if (dynamic_cast<const InfeasibleDominance*>(&e)) return "InfeasibleDominance";
    if (dynamic_cast<const Infeasible*>(&e)) return "Infeasible";
    return "DomainError";
}

void emit(const Table& t, const Globals& g, std::ostream& out) {
    const std::string text = g.format == "json" ? t.json() : t.csv();
    if (g.output.empty()) {
        out << text;
        return;
    }
    std::ofstream f(g.output, std::ios::binary);
    if (!f) throw Error("cannot open " + g.output + " for writing");
    f << text;
    if (!f) throw Error("failed writing " + g.output);
}

DivergenceOptions divergence_options(const Globals& g) {
    DivergenceOptions o;
    o.chi_weight = parse_chi_squared_weight(g.chi_weight);
    return o;
}

std::vector<double> parse_pair(const std::string& text, const char* what) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument("trailing");
        } catch (const std::logic_error&) {
            throw InvalidArgument(std::string(what) + ": not a number list: '" + text + "'");
        }
    }
    if (v.size() != 2) throw InvalidArgument(std::string(what) + ": expected two comma-separated numbers");
    return v;
}

// Config keys become "--key value" arguments for options absent from the command line.
std::vector<std::string> config_arguments(const std::string& path, const CLI::App& sub, const CLI::App& root,
                                          const std::vector<std::string>& given) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read config file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
    std::vector<std::string> extra;
    for (const auto& [key, value] : j.items()) {
        if (key == "config" || key == "help") throw InvalidArgument("config key not allowed: " + key);
        const CLI::Option* opt = sub.get_option_no_throw("--" + key);
        if (!opt) opt = root.get_option_no_throw("--" + key);
        if (!opt) throw InvalidArgument("unknown config key: " + key);
        const bool on_command_line = std::any_of(given.begin(), given.end(), [&](const std::string& a) {
            return a == "--" + key || a.rfind("--" + key + "=", 0) == 0;
        });
        if (on_command_line) continue;
        if (value.is_boolean()) {
            if (opt->get_type_size() != 0) throw InvalidArgument("config key " + key + " takes a value");
            if (value.get<bool>()) extra.push_back("--" + key);
            continue;
        }
        if (opt->get_type_size() == 0) throw InvalidArgument("config key " + key + " must be true or false");
        std::string text;
        if (value.is_string()) {
            text = value.get<std::string>();
        } else if (value.is_number_integer() || value.is_number_unsigned()) {
            text = value.dump();
        } else if (value.is_number_float()) {
            text = format_double(value.get<double>());
        } else if (value.is_array()) {
            for (const auto& x : value) {
                if (!x.is_number()) throw InvalidArgument("config key " + key + ": arrays must hold numbers");
                text += (text.empty() ? "" : ",") + format_double(x.get<double>());
            }
        } else {
            throw InvalidArgument("config key " + key + " has an unsupported value type");
        }
        extra.push_back("--" + key);
        extra.push_back(text);
    }
    return extra;
}

// ---------------------------------------------------------------------------

struct RvdArgs {
    std::string p;
    std::string phat;
    std::size_t grid_points = 0;
};

Table cmd_rvd(const RvdArgs& a) {
    const Distribution p = parse_distribution(a.p);
    const Distribution phat = parse_distribution(a.phat);
    double value = 0.0;
    std::string method = "closed_form";
    if (std::holds_alternative<Gaussian1>(p) && std::holds_alternative<Gaussian1>(phat)) {
        value = rvd_gaussian_1d(std::get<Gaussian1>(p), std::get<Gaussian1>(phat));
    } else if (std::holds_alternative<GaussianNd>(p) && std::holds_alternative<GaussianNd>(phat)) {
        value = rvd_gaussian_nd(std::get<GaussianNd>(p), std::get<GaussianNd>(phat));
    } else {
        method = "grid";
        value = rvd_numeric(p, phat, default_grids(p, phat, a.grid_points));
    }
    return {{"m_rvd", "method"}, {{value, method}}};
}

struct DivergenceArgs {
    std::string kind;
    std::string p;
    std::string phat;
    std::size_t grid_points = 0;
};

Table cmd_divergence(const DivergenceArgs& a, const Globals& g) {
    const auto kind = parse_discrepancy_kind(a.kind);
    const Distribution p = parse_distribution(a.p);
    const Distribution phat = parse_distribution(a.phat);
    const auto opts = divergence_options(g);
    double value = 0.0;
    std::string method = "closed_form";
    const bool gauss = std::holds_alternative<Gaussian1>(p) && std::holds_alternative<Gaussian1>(phat);
    if (gauss && (kind == DiscrepancyKind::Rvd || kind == DiscrepancyKind::KullbackLeibler ||
                  kind == DiscrepancyKind::Hellinger)) {
        value = divergence_gaussian_1d(kind, std::get<Gaussian1>(p), std::get<Gaussian1>(phat));
    } else if (std::holds_alternative<DiscreteDist>(p) && std::holds_alternative<DiscreteDist>(phat)) {
        const auto& dp = std::get<DiscreteDist>(p);
        const auto& dq = std::get<DiscreteDist>(phat);
        if (dp.atoms() != dq.atoms()) throw InvalidArgument("discrete divergence needs identical atom lists");
        method = "discrete";
        value = divergence_discrete(kind, dp.weights(), dq.weights(), opts);
    } else {
        method = "grid";
        const auto grids = default_grids(p, phat, a.grid_points);
        value = kind == DiscrepancyKind::Rvd ? rvd_numeric(p, phat, grids) : divergence_numeric(kind, p, phat, grids, opts);
    }
    return {{"kind", "value", "method"}, {{std::string(to_string(kind)), value, method}}};
}

struct PrlArgs {
    std::string kind;
    double m = 0.0;
    double eps = 0.0;
};

Table cmd_prl(const PrlArgs& a, const Globals& g) {
    const auto kind = parse_discrepancy_kind(a.kind);
    PrlOptions po;
    po.divergence = divergence_options(g);
    const auto r = prl(kind, a.m, a.eps, po);
    return {{"kind", "radius", "eps", "eps_hat"}, {{std::string(to_string(kind)), r.radius, r.eps, r.eps_hat}}};
}

struct FamilyArgs {
    bool table1 = false;
    std::string family = "random";
    std::size_t count = 25;
    std::size_t grid_n = 5;
    std::string mu_range = "-1,1";
    std::string sigma_range = "1,2";
};

GaussianFamily build_family(const FamilyArgs& a, const Globals& g) {
    if (a.table1) return comparison_family();
    const auto mu = parse_pair(a.mu_range, "--mu-range");
    const auto sg = parse_pair(a.sigma_range, "--sigma-range");
    if (a.family == "grid") return make_family_grid(mu[0], mu[1], sg[0], sg[1], a.grid_n, a.grid_n);
    if (g.seed > 0xFFFFFFFFULL) throw InvalidArgument("--seed must fit in 32 bits for the random family");
    return make_family_uniform_draws(static_cast<std::uint32_t>(g.seed), a.count, mu[0], mu[1], sg[0], sg[1]);
}

std::vector<DiscrepancyKind> selected_kinds(const std::string& kind) {
    if (kind.empty() || kind == "all") return {kAllDiscrepancyKinds.begin(), kAllDiscrepancyKinds.end()};
    return {parse_discrepancy_kind(kind)};
}

struct FitArgs {
    FamilyArgs family;
    std::string kind;
    double eps = 0.01;
};

Table cmd_fit_nominal(const FitArgs& a, const Globals& g) {
    const auto fam = build_family(a.family, g);
    FitOptions fo;
    fo.divergence = divergence_options(g);
    fo.threads = g.threads;
    PrlOptions po;
    po.divergence = fo.divergence;
    Table t{{"kind", "mu_hat", "sigma_hat", "radius", "eps", "prl"}, {}};
    for (auto kind : selected_kinds(a.kind)) {
        const auto fit = fit_nominal(kind, fam, fo);
        const auto r = prl(kind, fit.radius, a.eps, po);
        t.rows.push_back({std::string(to_string(kind)), fit.nominal.mu(), fit.nominal.sigma(), fit.radius, a.eps,
                          r.eps_hat});
    }
    return t;
}

struct CurveArgs {
    FamilyArgs family;
    std::string kind;
    double m = -1.0;
    double eps_min = 1e-4;
    double eps_max = 0.9;
    std::size_t points = 60;
};

Table cmd_prl_curve(const CurveArgs& a, const Globals& g) {
    PrlOptions po;
    po.divergence = divergence_options(g);
    std::vector<std::pair<DiscrepancyKind, double>> curves;
    if (a.m >= 0.0) {
        if (a.kind.empty() || a.kind == "all") throw InvalidArgument("--m needs a single --kind");
        curves.emplace_back(parse_discrepancy_kind(a.kind), a.m);
    } else {
        // Radii fitted to the family, one curve per kind.
        const auto fam = build_family(a.family, g);
        FitOptions fo;
        fo.divergence = po.divergence;
        fo.threads = g.threads;
        for (auto kind : selected_kinds(a.kind)) curves.emplace_back(kind, fit_nominal(kind, fam, fo).radius);
    }
    if (!(a.eps_min > 0.0 && a.eps_min <= a.eps_max && a.eps_max <= 1.0)) {
        throw InvalidArgument("need 0 < eps-min <= eps-max <= 1");
    }
    const auto grid = log_spaced(a.eps_min, a.eps_max, a.points);
    Table t{{"kind", "radius", "eps", "eps_hat", "ratio"}, {}};
    for (const auto& [kind, m] : curves) {
        for (const auto& r : prl_curve(kind, m, grid, po)) {
            t.rows.push_back({std::string(to_string(kind)), m, r.eps, r.eps_hat, r.eps_hat / r.eps});
        }
    }
    return t;
}

struct BoundArgs {
    std::size_t n = 1000;
    std::size_t d = 2;
    double eps = 0.0;
    std::string kind;
    double m = -1.0;
    std::string method = "auto";
};

Table cmd_scenario_bound(const BoundArgs& a, const Globals& g) {
    const ScenarioParams p(a.n, a.d);
    PrlOptions po;
    po.divergence = divergence_options(g);
    if (a.kind.empty()) {
        if (a.m >= 0.0) throw InvalidArgument("--m needs --kind");
        return {{"n", "d", "eps", "kind", "radius", "bound"},
                {{static_cast<long long>(a.n), static_cast<long long>(a.d), a.eps, std::string("nominal"), 0.0,
                  two_level_nominal(p, a.eps)}}};
    }
    if (a.m < 0.0) throw InvalidArgument("--kind needs --m");
    const auto kind = parse_discrepancy_kind(a.kind);
    return {{"n", "d", "eps", "kind", "radius", "bound"},
            {{static_cast<long long>(a.n), static_cast<long long>(a.d), a.eps, std::string(to_string(kind)), a.m,
              two_level_dr(p, kind, a.m, a.eps, po)}}};
}

Table cmd_expected_bound(const BoundArgs& a, const Globals& g) {
    const ScenarioParams p(a.n, a.d);
    Table t{{"n", "d", "kind", "radius", "method", "value"}, {}};
    const auto n = static_cast<long long>(a.n);
    const auto d = static_cast<long long>(a.d);
    if (a.kind.empty()) {
        t.rows.push_back({n, d, std::string("nominal"), 0.0, std::string("closed_form"), expected_nominal(p)});
        return t;
    }
    if (a.m < 0.0) throw InvalidArgument("--kind needs --m");
    const auto kind = parse_discrepancy_kind(a.kind);
    std::string method = a.method;
    if (method == "auto") method = kind == DiscrepancyKind::Rvd ? "closed_form" : "quadrature";
    double value = 0.0;
    if (method == "closed_form") {
        if (kind != DiscrepancyKind::Rvd) throw InvalidArgument("closed form exists only for rvd");
        value = expected_dr_rvd(p, a.m);
    } else if (method == "quadrature") {
        ExpectedBoundOptions eo;
        eo.prl.divergence = divergence_options(g);
        value = expected_dr_numeric(p, kind, a.m, eo);
    } else {
        throw InvalidArgument("--method must be auto, closed_form or quadrature");
    }
    t.rows.push_back({n, d, std::string(to_string(kind)), a.m, method, value});
    return t;
}

struct RmpcArgs {
    bool full_scale = false;
    std::size_t trials = 0;
    std::size_t eval = 0;
    std::size_t n_scenarios = 1000;
    std::size_t horizon = 2;
    double m_rvd = 4.0;
    std::string x0 = "1.5,0.4";
    std::string nominal = "box:-0.2,-0.2,0.2,0.2";
    std::string truth = "ring:0.1,0.2,2";
    bool iid_per_step = false;
    std::size_t bins = 100;
    double hist_max = 0.025;
};

Table cmd_rmpc(const RmpcArgs& a, const Globals& g, std::string& out_dir) {
    RmpcExperiment exp;
    exp.n_trials = a.trials ? a.trials : (a.full_scale ? 800 : 200);
    exp.n_eval = a.eval ? a.eval : (a.full_scale ? 40000 : 10000);
    exp.n_scenarios = a.n_scenarios;
    exp.horizon = a.horizon;
    exp.m_rvd = a.m_rvd;
    const auto x0 = parse_pair(a.x0, "--x0");
    exp.x0 = Eigen::Vector2d(x0[0], x0[1]);
    exp.nominal = parse_distribution(a.nominal);
    exp.truth = parse_distribution(a.truth);
    exp.iid_per_step = a.iid_per_step;
    exp.histogram_bins = a.bins;
    exp.histogram_max = a.hist_max;
    exp.seed = g.seed;
    exp.threads = g.threads;
    const auto rep = run_experiment(exp);
    write_experiment_outputs(exp, rep, out_dir);
    return {{"trials", "infeasible", "max_support", "mean_nominal", "se_nominal", "mean_truth", "se_truth",
             "expected_nominal", "expected_dr_rvd", "output_dir"},
            {{static_cast<long long>(exp.n_trials), static_cast<long long>(rep.infeasible),
              static_cast<long long>(rep.max_support), rep.mean_nominal, rep.se_nominal, rep.mean_truth, rep.se_truth,
              rep.expected_nominal, rep.expected_dr, out_dir}}};
}

void add_family_options(CLI::App* sub, FamilyArgs& f) {
    sub->add_option("--family", f.family, "Member family: random (uniform draws seeded by --seed) or grid")
        ->check(CLI::IsMember({"random", "grid"}));
    sub->add_option("--count", f.count, "Members drawn for the random family")->check(CLI::PositiveNumber);
    sub->add_option("--grid-n", f.grid_n, "Points per axis for the grid family")->check(CLI::PositiveNumber);
    sub->add_option("--mu-range", f.mu_range, "Mean range LO,HI");
    sub->add_option("--sigma-range", f.sigma_range, "Standard deviation range LO,HI");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Distributionally robust risk levels, scenario bounds and the randomized MPC experiment", "drrisk"};
    app.footer(kFooter);
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Seed for stochastic commands");
    app.add_option("--output", g.output, "Output file (rmpc: output directory)");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--config", g.config, "JSON file of option values");
    app.add_option("--chi-weight", g.chi_weight, "Chi-squared weighting: nominal or member")
        ->check(CLI::IsMember({"nominal", "member"}));
    app.add_option("--threads", g.threads, "Worker threads (0 = hardware concurrency)");

    RvdArgs rvd_a;
    auto* rvd_cmd = app.add_subcommand("rvd", "Relative variation distance sup f_P / f_Phat");
    rvd_cmd->add_option("--p", rvd_a.p, "Distribution P")->required();
    rvd_cmd->add_option("--phat", rvd_a.phat, "Nominal distribution")->required();
    rvd_cmd->add_option("--grid-points", rvd_a.grid_points, "Grid points per axis for the numeric path");

    DivergenceArgs div_a;
    auto* div_cmd = app.add_subcommand("divergence", "Discrepancy rho(P, Phat) of any kind");
    div_cmd->add_option("--kind", div_a.kind, "Discrepancy kind")->required();
    div_cmd->add_option("--p", div_a.p, "Distribution P")->required();
    div_cmd->add_option("--phat", div_a.phat, "Nominal distribution")->required();
    div_cmd->add_option("--grid-points", div_a.grid_points, "Grid points per axis for the numeric path");

    PrlArgs prl_a;
    auto* prl_cmd = app.add_subcommand("prl", "Perturbed risk level for one radius and risk level");
    prl_cmd->add_option("--kind", prl_a.kind, "Discrepancy kind")->required();
    prl_cmd->add_option("--m", prl_a.m, "Ambiguity radius")->required();
    prl_cmd->add_option("--eps", prl_a.eps, "Risk level in [0, 1]")->required();

    CurveArgs curve_a;
    auto* curve_cmd = app.add_subcommand("prl-curve", "PRL over a log-spaced risk grid (radii fitted unless --m)");
    curve_cmd->add_option("--kind", curve_a.kind, "Discrepancy kind, or all");
    curve_cmd->add_option("--m", curve_a.m, "Radius for a single --kind");
    curve_cmd->add_option("--eps-min", curve_a.eps_min, "Smallest risk level");
    curve_cmd->add_option("--eps-max", curve_a.eps_max, "Largest risk level");
    curve_cmd->add_option("--points", curve_a.points, "Grid size")->check(CLI::PositiveNumber);
    add_family_options(curve_cmd, curve_a.family);

    FitArgs fit_a;
    auto* fit_cmd = app.add_subcommand("fit-nominal", "Minimax nominal Gaussian and radius for a member family");
    fit_cmd->add_flag("--table1", fit_a.family.table1, "All kinds on the seed-0 comparison family at eps = 0.01");
    fit_cmd->add_option("--kind", fit_a.kind, "Discrepancy kind, or all");
    fit_cmd->add_option("--eps", fit_a.eps, "Risk level for the PRL column");
    add_family_options(fit_cmd, fit_a.family);

    BoundArgs sb_a;
    auto* sb_cmd = app.add_subcommand("scenario-bound", "Confidence bound F_N at eps (robust when --kind is given)");
    sb_cmd->add_option("--n", sb_a.n, "Number of scenarios N")->required();
    sb_cmd->add_option("--d", sb_a.d, "Support constraint bound d")->required();
    sb_cmd->add_option("--eps", sb_a.eps, "Risk level")->required();
    sb_cmd->add_option("--kind", sb_a.kind, "Discrepancy kind");
    sb_cmd->add_option("--m", sb_a.m, "Ambiguity radius");

    BoundArgs eb_a;
    auto* eb_cmd = app.add_subcommand("expected-bound", "Bound on the expected violation probability");
    eb_cmd->add_option("--n", eb_a.n, "Number of scenarios N")->required();
    eb_cmd->add_option("--d", eb_a.d, "Support constraint bound d")->required();
    eb_cmd->add_option("--kind", eb_a.kind, "Discrepancy kind (omit for the nominal bound)");
    eb_cmd->add_option("--m", eb_a.m, "Ambiguity radius");
    eb_cmd->add_option("--method", eb_a.method, "auto, closed_form or quadrature");

    RmpcArgs rm_a;
    auto* rm_cmd = app.add_subcommand("rmpc", "Randomized MPC experiment: histograms, overlays and report");
    rm_cmd->add_flag("--full-scale", rm_a.full_scale, "800 trials x 40000 evaluations (default 200 x 10000)");
    rm_cmd->add_option("--trials", rm_a.trials, "Number of trials");
    rm_cmd->add_option("--eval", rm_a.eval, "Evaluation draws per trial");
    rm_cmd->add_option("--n-scenarios", rm_a.n_scenarios, "Scenarios per trial");
    rm_cmd->add_option("--horizon", rm_a.horizon, "Prediction horizon");
    rm_cmd->add_option("--m-rvd", rm_a.m_rvd, "RVD radius for the overlays");
    rm_cmd->add_option("--x0", rm_a.x0, "Initial state X,V");
    rm_cmd->add_option("--nominal", rm_a.nominal, "Scenario distribution");
    rm_cmd->add_option("--truth", rm_a.truth, "Evaluation distribution");
    rm_cmd->add_flag("--iid-per-step", rm_a.iid_per_step, "Independent disturbance at every step");
    rm_cmd->add_option("--bins", rm_a.bins, "Histogram bins")->check(CLI::PositiveNumber);
    rm_cmd->add_option("--hist-max", rm_a.hist_max, "Histogram upper edge");

    try {
        // Config values are merged before parsing so they can satisfy required options.
        std::vector<std::string> merged(args);
        std::string config_path;
        const CLI::App* sub = nullptr;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
            if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
            if (!sub && !args[i].empty() && args[i][0] != '-') sub = app.get_subcommand_no_throw(args[i]);
        }
        if (!config_path.empty()) {
            if (!sub) throw InvalidArgument("--config needs a subcommand");
            const auto extra = config_arguments(config_path, *sub, app, args);
            merged.insert(merged.end(), extra.begin(), extra.end());
        }
        std::vector<std::string> argv(merged.rbegin(), merged.rend());
        app.parse(argv);

        Table t;
        if (*rvd_cmd) {
            t = cmd_rvd(rvd_a);
        } else if (*div_cmd) {
            t = cmd_divergence(div_a, g);
        } else if (*prl_cmd) {
            t = cmd_prl(prl_a, g);
        } else if (*curve_cmd) {
            t = cmd_prl_curve(curve_a, g);
        } else if (*fit_cmd) {
            if (fit_a.family.table1 && (fit_cmd->count("--family") || fit_cmd->count("--kind") || fit_cmd->count("--eps"))) {
                throw InvalidArgument("--table1 fixes the family, kinds and eps");
            }
            t = cmd_fit_nominal(fit_a, g);
        } else if (*sb_cmd) {
            t = cmd_scenario_bound(sb_a, g);
        } else if (*eb_cmd) {
            t = cmd_expected_bound(eb_a, g);
        } else if (*rm_cmd) {
            std::string dir = g.output;
            if (dir.empty()) {
                const char* env = std::getenv("DRRISK_OUTPUT_DIR");
                dir = env && *env ? env : "rmpc_output";
            }
            t = cmd_rmpc(rm_a, g, dir);
            Globals to_stdout = g;
            to_stdout.output.clear();
            emit(t, to_stdout, out);
            return kExitOk;
        }
        emit(t, g, out);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "error: " << domain_error_name(e) << ": " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace drrisk::cli

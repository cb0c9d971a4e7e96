#include "commands.hpp"

#include "config.hpp"
#include "fxband/errors.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace fxband::cli {

namespace {

constexpr int kJsonIndent = 2;

PolicySolution solve_problem(const ProblemConfig& cfg, const std::optional<Unknowns>& start = {}) {
    if (cfg.reaction.is_none() && !start) return solve_t0(cfg.model, cfg.cost, cfg.solver);
    return solve(cfg.model, cfg.cost, cfg.reaction, cfg.solver, start);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

void write_text(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw InvalidParameter("cannot write '" + path + "'");
    f << text;
}

// Rows are printed with enough digits to round-trip.
std::ostringstream csv_stream() {
    std::ostringstream os;
    os << std::setprecision(17);
    return os;
}

// ---- solve / verify -------------------------------------------------------

struct SolveArgs {
    std::string config;
    std::string out;
};

int cmd_solve(const SolveArgs& args, std::ostream& out) {
    const auto cfg = load_config(args.config);
    const auto sol = solve_problem(cfg);
    write_text(solution_to_json(sol).dump(kJsonIndent) + "\n", args.out, out);
    return sol.verified.all_pass() ? kExitOk : kExitCheckFailed;
}

struct VerifyArgs {
    std::string config;
    std::string solution;
};

int cmd_verify(const VerifyArgs& args, std::ostream& out) {
    const auto cfg = load_config(args.config);
    const FreeBoundarySystem system(cfg.model, cfg.cost,
                                    build_nodes(cfg.reaction, cfg.model, cfg.solver.n_quad),
                                    cfg.solver.n_inner);
    PolicySolution sol;
    if (args.solution.empty()) {
        sol = solve_problem(cfg);
    } else {
        sol = load_solution(args.solution, cfg.model);
        BandPolicy{sol.a, sol.b, sol.alpha}.validate();
        sol.residual_norm = residual_norm(system.residuals(sol.unknowns()));
        sol.verified = verify(sol, system);
    }
    const auto res = system.residuals(sol.unknowns());
    const bool converged = residual_norm(res) <= cfg.solver.tol_residual;
    json report = {
        {"converged", converged},
        {"residuals", json(std::vector<double>(res.begin(), res.end()))},
        {"residual_norm", residual_norm(res)},
        {"checks", checks_to_json(sol.verified)},
    };
    out << report.dump(kJsonIndent) << "\n";
    return converged && sol.verified.all_pass() ? kExitOk : kExitCheckFailed;
}

// ---- curve ----------------------------------------------------------------

struct CurveArgs {
    std::string config;
    std::string solution;
    double xmin = 0.2;
    double xmax = 3.0;
    int n = 281;
};

int cmd_curve(const CurveArgs& args, std::ostream& out) {
    const auto cfg = load_config(args.config);
    if (!(args.xmin > 0.0 && args.xmax >= args.xmin))
        throw InvalidParameter("curve needs 0 < xmin <= xmax");
    if (args.n < 1) throw InvalidParameter("curve needs n >= 1");
    const auto sol = args.solution.empty() ? solve_problem(cfg) : load_solution(args.solution, cfg.model);
    auto os = csv_stream();
    os << "x,V\n";
    for (int i = 0; i < args.n; ++i) {
        const double x = args.n == 1 ? args.xmin
                                     : args.xmin + (args.xmax - args.xmin) * i / (args.n - 1);
        os << x << ',' << value_function(sol, x) << '\n';
    }
    out << os.str();
    return kExitOk;
}

// ---- table ----------------------------------------------------------------

struct TableRow {
    std::string label;
    std::function<PolicySolution()> solve;
};

// Numerical example: rho = 1.4, r = 0.06, mu = 0.1, sigma = 0.3, K = 0.5,
// reaction volatility 0.4 unless stated otherwise.
std::vector<TableRow> table_rows(const std::string& which, const SolverConfig& sc) {
    const ModelParams base{0.1, 0.3, 0.06, 1.4};
    const CostSpec k05{0.5};
    auto t0 = [=](double k) { return [=] { return solve_t0(base, CostSpec{k}, sc); }; };
    auto reaction = [=](ReactionLaw law) { return [=] { return solve(base, k05, law, sc); }; };
    const auto vol_up = ReactionLaw::fixed(1.0, 0.1, 0.0);

    if (which == "reaction-compare")
        return {{"None (T=0) K=0.5", t0(0.5)},
                {"T=1", reaction(vol_up)},
                {"None (T=0) K=0.63", t0(0.63)}};
    if (which == "statics")
        return {{"No reaction", t0(0.5)},
                {"Volatility increases", reaction(vol_up)},
                {"Volatility decreases", reaction(ReactionLaw::fixed(1.0, -0.2, 0.0))},
                {"Drift increases", reaction(ReactionLaw::fixed(1.0, 0.0, 0.05))},
                {"Drift decreases", reaction(ReactionLaw::fixed(1.0, 0.0, -0.05))}};
    if (which == "horizon")
        return {{"None (T=0)", t0(0.5)},
                {"T=1", reaction(vol_up)},
                {"T=2", reaction(ReactionLaw::fixed(2.0, 0.1, 0.0))},
                {"T~U[0,1]", reaction({UniformLaw{0.0, 1.0}, PointLaw{0.1}, PointLaw{0.0}})}};
    throw InvalidParameter("unknown table '" + which + "'");
}

struct TableArgs {
    std::string which;
};

int cmd_table(const TableArgs& args, std::ostream& out, std::ostream& err) {
    const auto rows = table_rows(args.which, SolverConfig{});
    auto os = csv_stream();
    os << std::setprecision(6) << "label,a,b,alpha\n";
    bool failed = false;
    for (const auto& row : rows) {
        os << csv_field(row.label) << ',';
        try {
            const auto sol = row.solve();
            os << sol.a << ',' << sol.b << ',' << sol.alpha << '\n';
        } catch (const Error& e) {
            failed = true;
            os << "error,error,error\n";
            err << "fxband: table row '" << row.label << "': " << e.what() << '\n';
        }
    }
    out << os.str();
    return failed ? kExitError : kExitOk;
}

// ---- sweep ----------------------------------------------------------------

struct SweepArgs {
    std::string config;
    std::string param;
    double from = 0.0;
    double to = 0.0;
    int n = 11;
};

void set_param(ProblemConfig& cfg, const std::string& name, double v) {
    if (name == "mu") cfg.model.mu = v;
    else if (name == "sigma") cfg.model.sigma = v;
    else if (name == "r") cfg.model.r = v;
    else if (name == "rho") cfg.model.rho = v;
    else if (name == "K") cfg.cost.k_fixed = v;
    else if (name == "T") cfg.reaction.t_law = PointLaw{v};
    else if (name == "sigma_shift") cfg.reaction.sigma_shift_law = PointLaw{v};
    else if (name == "mu_shift") cfg.reaction.mu_shift_law = PointLaw{v};
    else throw InvalidParameter("unknown sweep parameter '" + name +
                                "' (mu, sigma, r, rho, K, T, sigma_shift, mu_shift)");
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
    const auto base = load_config(args.config);
    if (args.n < 1) throw InvalidParameter("sweep needs n >= 1");
    {
        auto probe = base;  // rejects unknown names before any output
        set_param(probe, args.param, args.from);
    }

    auto os = csv_stream();
    os << args.param << ",a,b,alpha\n";
    bool failed = false;
    std::optional<Unknowns> warm;
    for (int i = 0; i < args.n; ++i) {
        const double v = args.n == 1 ? args.from : args.from + (args.to - args.from) * i / (args.n - 1);
        os << v << ',';
        try {
            auto cfg = base;
            set_param(cfg, args.param, v);
            cfg.model.validate();
            cfg.reaction.validate(cfg.model.sigma);
            cfg.cost.validate();
            PolicySolution sol;
            try {
                sol = solve_problem(cfg, warm);
            } catch (const NoConvergence&) {
                if (!warm) throw;
                sol = solve_problem(cfg);
            }
            warm = sol.unknowns();
            os << sol.a << ',' << sol.b << ',' << sol.alpha << '\n';
        } catch (const Error& e) {
            failed = true;
            warm.reset();
            os << "error,error,error\n";
            err << "fxband: sweep " << args.param << '=' << v << ": " << e.what() << '\n';
        }
    }
    out << os.str();
    return failed ? kExitError : kExitOk;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::string policy_from;
    std::vector<std::string> perturb;
    std::string events;
    std::optional<double> x0;
    std::optional<std::int64_t> n_paths;
};

/// "alpha+0.05", "a-0.05", "b=2.4"
BandPolicy apply_perturbation(BandPolicy p, const std::string& spec) {
    const auto pos = spec.find_first_of("+-=", 1);
    if (pos == std::string::npos) throw InvalidParameter("bad perturbation '" + spec + "'");
    const std::string name = spec.substr(0, pos);
    double* field = name == "a" ? &p.a : name == "b" ? &p.b : name == "alpha" ? &p.alpha : nullptr;
    if (!field) throw InvalidParameter("perturbation must target a, b or alpha: '" + spec + "'");
    double v = 0.0;
    try {
        std::size_t used = 0;
        v = std::stod(spec.substr(pos + 1), &used);
        if (used != spec.size() - pos - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw InvalidParameter("bad perturbation amount in '" + spec + "'");
    }
    switch (spec[pos]) {
        case '+': *field += v; break;
        case '-': *field -= v; break;
        default: *field = v; break;
    }
    p.validate();
    return p;
}

json policy_json(const BandPolicy& p) { return {{"a", p.a}, {"b", p.b}, {"alpha", p.alpha}}; }

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
    auto cfg = load_config(args.config);
    if (args.x0) cfg.sim.x0 = *args.x0;
    if (args.n_paths) cfg.sim.n_paths = *args.n_paths;
    cfg.sim.validate();
    const auto sol = load_solution(args.policy_from, cfg.model);
    const BandPolicy policy{sol.a, sol.b, sol.alpha};
    policy.validate();

    std::vector<BandPolicy> policies{policy};
    for (const auto& spec : args.perturb) policies.push_back(apply_perturbation(policy, spec));

    if (cfg.sim.horizon_too_short(cfg.model.r))
        err << "fxband: warning: horizon " << cfg.sim.horizon << " is shorter than 10/r\n";

    json result;
    result["x0"] = cfg.sim.x0;
    result["policy"] = policy_json(policy);
    result["value_function"] = value_function(sol, cfg.sim.x0);

    std::vector<SimEvent> events;
    auto* events_ptr = args.events.empty() ? nullptr : &events;
    if (policies.size() == 1) {
        result["estimate"] = estimate_to_json(
            estimate_cost(policy, cfg.model, cfg.reaction, cfg.cost, cfg.sim, events_ptr));
    } else {
        const auto cmp = compare_policies(policies, cfg.model, cfg.reaction, cfg.cost, cfg.sim);
        result["estimate"] = estimate_to_json(cmp.estimates[0]);
        std::vector<std::string> labels{"optimal"};
        labels.insert(labels.end(), args.perturb.begin(), args.perturb.end());
        json rows = json::array();
        for (std::size_t i = 1; i < policies.size(); ++i) {
            const auto& pair = cmp.pairs[i - 1];  // (0, i)
            rows.push_back({{"perturbation", labels[i]},
                            {"policy", policy_json(policies[i])},
                            {"estimate", estimate_to_json(cmp.estimates[i])},
                            {"diff_vs_optimal", -pair.mean_diff},
                            {"stderr_pair", pair.std_error}});
        }
        json ranking = json::array();
        for (auto idx : cmp.ranking) ranking.push_back(labels[idx]);
        result["comparison"] = {{"crn", cfg.sim.crn}, {"rows", rows}, {"ranking", ranking}};
        if (events_ptr) simulate_paths(policy, cfg.model, cfg.reaction, cfg.cost, cfg.sim, events_ptr);
    }
    if (events_ptr) {
        std::ofstream f(args.events);
        if (!f) throw InvalidParameter("cannot write '" + args.events + "'");
        write_event_csv(f, events);
    }
    out << result.dump(kJsonIndent) << "\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal intervention bands for an exchange rate with market reactions", "fxband"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    auto* solve_cmd = app.add_subcommand("solve", "Solve for the optimal band; prints solution JSON");
    solve_cmd->add_option("config", solve_args.config, "Problem config (JSON)")->required();
    solve_cmd->add_option("--out", solve_args.out, "Write the solution here instead of stdout");

    VerifyArgs verify_args;
    auto* verify_cmd = app.add_subcommand("verify", "Residuals and optimality checks for a solution");
    verify_cmd->add_option("config", verify_args.config, "Problem config (JSON)")->required();
    verify_cmd->add_option("--solution", verify_args.solution, "Solution JSON; solved afresh if omitted");

    CurveArgs curve_args;
    auto* curve_cmd = app.add_subcommand("curve", "Value function on a grid as CSV x,V");
    curve_cmd->add_option("config", curve_args.config, "Problem config (JSON)")->required();
    curve_cmd->add_option("--solution", curve_args.solution, "Solution JSON; solved afresh if omitted");
    curve_cmd->add_option("--xmin", curve_args.xmin, "Left end of the grid")->capture_default_str();
    curve_cmd->add_option("--xmax", curve_args.xmax, "Right end of the grid")->capture_default_str();
    curve_cmd->add_option("--n", curve_args.n, "Number of grid points")->capture_default_str();

    TableArgs table_args;
    auto* table_cmd = app.add_subcommand("table", "Reference policy tables as CSV label,a,b,alpha");
    table_cmd->add_option("which", table_args.which, "reaction-compare | statics | horizon")
        ->required()
        ->check(CLI::IsMember({"reaction-compare", "statics", "horizon"}));

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo cost of a band policy");
    sim_cmd->add_option("config", sim_args.config, "Problem config (JSON)")->required();
    sim_cmd->add_option("--policy-from", sim_args.policy_from, "Solution JSON giving a, b, alpha")
        ->required();
    sim_cmd->add_option("--perturb", sim_args.perturb,
                        "Compare against a perturbed policy, e.g. alpha+0.05 (repeatable)");
    sim_cmd->add_option("--events", sim_args.events, "Write the event log of the policy as CSV");
    sim_cmd->add_option("--x0", sim_args.x0, "Override sim.x0");
    sim_cmd->add_option("--n-paths", sim_args.n_paths, "Override sim.n_paths");

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "Band as one parameter varies; CSV param,a,b,alpha");
    sweep_cmd->add_option("config", sweep_args.config, "Problem config (JSON)")->required();
    sweep_cmd->add_option("--param", sweep_args.param,
                          "mu, sigma, r, rho, K, T, sigma_shift or mu_shift")
        ->required();
    sweep_cmd->add_option("--from", sweep_args.from, "First value")->required();
    sweep_cmd->add_option("--to", sweep_args.to, "Last value")->required();
    sweep_cmd->add_option("--n", sweep_args.n, "Number of values")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (*solve_cmd) return cmd_solve(solve_args, out);
        if (*verify_cmd) return cmd_verify(verify_args, out);
        if (*curve_cmd) return cmd_curve(curve_args, out);
        if (*table_cmd) return cmd_table(table_args, out, err);
        if (*sim_cmd) return cmd_simulate(sim_args, out, err);
        if (*sweep_cmd) return cmd_sweep(sweep_args, out, err);
    } catch (const NoConvergence& e) {
        err << "fxband: no convergence: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        err << "fxband: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace fxband::cli

#include "config.hpp"

#include "fxband/errors.hpp"

#include <fstream>
#include <initializer_list>
#include <string_view>

namespace fxband::cli {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw InvalidParameter(where.empty() ? "config: " + msg : "config " + where + ": " + msg);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> keys) {
    if (!j.is_object()) fail(where, "expected an object");
    for (const auto& [k, v] : j.items()) {
        bool known = false;
        for (auto key : keys) known = known || k == key;
        if (!known) fail(where, "unknown key '" + k + "'");
    }
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

std::int64_t integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    return j.get<std::int64_t>();
}

void read(const json& obj, const char* key, const std::string& where, double& out) {
    if (obj.contains(key)) out = number(obj.at(key), where + "." + key);
}

void read(const json& obj, const char* key, const std::string& where, int& out) {
    if (obj.contains(key)) out = static_cast<int>(integer(obj.at(key), where + "." + key));
}

void read(const json& obj, const char* key, const std::string& where, std::int64_t& out) {
    if (obj.contains(key)) out = integer(obj.at(key), where + "." + key);
}

void read(const json& obj, const char* key, const std::string& where, std::uint64_t& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned()) fail(where + "." + key, "expected a non-negative integer");
    out = v.get<std::uint64_t>();
}

void read(const json& obj, const char* key, const std::string& where, bool& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) fail(where + "." + key, "expected true or false");
    out = v.get<bool>();
}

double required(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) fail(where, std::string("missing '") + key + "'");
    return number(obj.at(key), where + "." + key);
}

ScalarLaw parse_law(const json& j, const std::string& where) {
    if (j.is_number()) return PointLaw{j.get<double>()};
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
        fail(where, "expected a number or an object with a string 'type'");
    const auto type = j.at("type").get<std::string>();
    if (type == "point") {
        only_keys(j, where, {"type", "value"});
        return PointLaw{required(j, "value", where)};
    }
    if (type == "uniform") {
        only_keys(j, where, {"type", "lo", "hi"});
        return UniformLaw{required(j, "lo", where), required(j, "hi", where)};
    }
    if (type == "discrete") {
        only_keys(j, where, {"type", "atoms"});
        if (!j.contains("atoms") || !j.at("atoms").is_array())
            fail(where, "discrete law needs an 'atoms' array of [value, probability]");
        DiscreteLaw law;
        for (const auto& atom : j.at("atoms")) {
            if (!atom.is_array() || atom.size() != 2)
                fail(where + ".atoms", "each atom must be [value, probability]");
            law.atoms.emplace_back(number(atom[0], where + ".atoms"), number(atom[1], where + ".atoms"));
        }
        return law;
    }
    fail(where + ".type", "unknown law type '" + type + "'");
}

}  // namespace

ProblemConfig parse_config(const json& j) {
    only_keys(j, "", {"model", "reaction", "cost", "solver", "sim"});
    ProblemConfig cfg;

    if (!j.contains("model")) fail("", "missing 'model'");
    const auto& m = j.at("model");
    only_keys(m, "model", {"mu", "sigma", "r", "rho"});
    cfg.model = {required(m, "mu", "model"), required(m, "sigma", "model"),
                 required(m, "r", "model"), required(m, "rho", "model")};

    if (j.contains("reaction")) {
        const auto& rx = j.at("reaction");
        only_keys(rx, "reaction", {"T", "sigma_shift", "mu_shift"});
        if (rx.contains("T")) cfg.reaction.t_law = parse_law(rx.at("T"), "reaction.T");
        if (rx.contains("sigma_shift"))
            cfg.reaction.sigma_shift_law = parse_law(rx.at("sigma_shift"), "reaction.sigma_shift");
        if (rx.contains("mu_shift"))
            cfg.reaction.mu_shift_law = parse_law(rx.at("mu_shift"), "reaction.mu_shift");
    }

    if (!j.contains("cost")) fail("", "missing 'cost'");
    only_keys(j.at("cost"), "cost", {"K"});
    cfg.cost.k_fixed = required(j.at("cost"), "K", "cost");

    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        only_keys(s, "solver",
                  {"tol_residual", "max_iter", "fd_step", "n_inner", "n_quad", "homotopy_steps"});
        read(s, "tol_residual", "solver", cfg.solver.tol_residual);
        read(s, "max_iter", "solver", cfg.solver.max_iter);
        read(s, "fd_step", "solver", cfg.solver.fd_step);
        read(s, "n_inner", "solver", cfg.solver.n_inner);
        read(s, "n_quad", "solver", cfg.solver.n_quad);
        read(s, "homotopy_steps", "solver", cfg.solver.homotopy_steps);
    }

    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        only_keys(s, "sim", {"x0", "dt", "horizon", "n_paths", "seed", "crn", "threads"});
        read(s, "x0", "sim", cfg.sim.x0);
        read(s, "dt", "sim", cfg.sim.dt);
        read(s, "horizon", "sim", cfg.sim.horizon);
        read(s, "n_paths", "sim", cfg.sim.n_paths);
        read(s, "seed", "sim", cfg.sim.seed);
        read(s, "crn", "sim", cfg.sim.crn);
        read(s, "threads", "sim", cfg.sim.threads);
    }

    cfg.model.validate();
    cfg.reaction.validate(cfg.model.sigma);
    cfg.cost.validate();
    cfg.solver.validate();
    cfg.sim.validate();
    return cfg;
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw InvalidParameter("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

json to_json(const ScalarLaw& law) {
    return std::visit(
        [](const auto& l) -> json {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, PointLaw>) {
                return {{"type", "point"}, {"value", l.value}};
            } else if constexpr (std::is_same_v<L, UniformLaw>) {
                return {{"type", "uniform"}, {"lo", l.lo}, {"hi", l.hi}};
            } else {
                json atoms = json::array();
                for (const auto& [v, p] : l.atoms) atoms.push_back({v, p});
                return {{"type", "discrete"}, {"atoms", atoms}};
            }
        },
        law);
}

json to_json(const ProblemConfig& cfg) {
    return {
        {"model", {{"mu", cfg.model.mu}, {"sigma", cfg.model.sigma}, {"r", cfg.model.r}, {"rho", cfg.model.rho}}},
        {"reaction",
         {{"T", to_json(cfg.reaction.t_law)},
          {"sigma_shift", to_json(cfg.reaction.sigma_shift_law)},
          {"mu_shift", to_json(cfg.reaction.mu_shift_law)}}},
        {"cost", {{"K", cfg.cost.k_fixed}}},
        {"solver",
         {{"tol_residual", cfg.solver.tol_residual},
          {"max_iter", cfg.solver.max_iter},
          {"fd_step", cfg.solver.fd_step},
          {"n_inner", cfg.solver.n_inner},
          {"n_quad", cfg.solver.n_quad},
          {"homotopy_steps", cfg.solver.homotopy_steps}}},
        {"sim",
         {{"x0", cfg.sim.x0},
          {"dt", cfg.sim.dt},
          {"horizon", cfg.sim.horizon},
          {"n_paths", cfg.sim.n_paths},
          {"seed", cfg.sim.seed},
          {"crn", cfg.sim.crn},
          {"threads", cfg.sim.threads}}},
    };
}

json checks_to_json(const VerificationReport& report) {
    auto check = [](const Check& c) { return json{{"pass", c.pass}, {"margin", c.margin}}; };
    return {
        {"cond_lower", check(report.cond_lower)},
        {"cond_upper", check(report.cond_upper)},
        {"value_at_alpha", check(report.value_at_alpha)},
        {"ode_residual", check(report.ode_residual)},
        {"outside_band", check(report.outside_band)},
        {"below_theta", check(report.below_theta)},
        {"smooth_pasting", check(report.smooth_pasting)},
        {"all_pass", report.all_pass()},
    };
}

json solution_to_json(const PolicySolution& sol) {
    return {
        {"A", sol.coeffs.a_coef},
        {"B", sol.coeffs.b_coef},
        {"a", sol.a},
        {"b", sol.b},
        {"alpha", sol.alpha},
        {"theta", sol.theta},
        {"residual_norm", sol.residual_norm},
        {"checks", checks_to_json(sol.verified)},
    };
}

PolicySolution solution_from_json(const json& j, const ModelParams& model) {
    if (!j.is_object()) throw InvalidParameter("solution: expected an object");
    only_keys(j, "solution", {"A", "B", "a", "b", "alpha", "theta", "residual_norm", "checks"});
    PolicySolution sol;
    sol.a = required(j, "a", "solution");
    sol.b = required(j, "b", "solution");
    sol.alpha = required(j, "alpha", "solution");
    sol.theta = required(j, "theta", "solution");
    sol.coeffs = ValueCoeffs::make(model, required(j, "A", "solution"), required(j, "B", "solution"));
    if (j.contains("residual_norm")) sol.residual_norm = number(j.at("residual_norm"), "solution.residual_norm");
    return sol;
}

PolicySolution load_solution(const std::string& path, const ModelParams& model) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("cannot open solution '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw InvalidParameter("solution '" + path + "' is not valid JSON: " + e.what());
    }
    return solution_from_json(j, model);
}

json estimate_to_json(const CostEstimate& est) {
    return {
        {"mean", est.mean},
        {"stderr", est.std_error},
        {"n_paths", est.n_paths},
        {"mean_interventions_per_unit_time", est.mean_interventions_per_unit_time},
    };
}

}  // namespace fxband::cli

#include <algorithm>
#include <fstream>
#include <set>

#include "phasecur/scenario.hpp"

namespace phasecur {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::Config, msg); }

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!ok.count(key)) fail("unknown key '" + key + "' in " + where);
    }
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where + " must be a number");
    return v.get<double>();
}

double positive(const json& v, const std::string& where) {
    const double x = number(v, where);
    if (!(x > 0.0)) fail(where + " must be positive");
    return x;
}

Vec3 vec3(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) fail(where + " must be an array of 3 numbers");
    return {number(v[0], where), number(v[1], where), number(v[2], where)};
}

cplx complex_value(const json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2) return {number(v[0], where), number(v[1], where)};
    fail(where + " must be a number or a [re, im] pair");
}

std::vector<cplx> coefficients(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) fail(where + " must be a non-empty array");
    std::vector<cplx> out;
    for (const auto& c : v) out.push_back(complex_value(c, where));
    return out;
}

Grid3 grid(const json& j, const std::string& where) {
    only_keys(j, where, {"n", "L"});
    if (!j.contains("n") || !j.contains("L")) fail(where + " needs n and L");
    Index3 n{};
    Vec3 L{};
    if (j["n"].is_array()) {
        if (j["n"].size() != 3) fail(where + ".n must be an integer or 3 integers");
        for (int a = 0; a < 3; ++a) {
            if (!j["n"][a].is_number_integer() || j["n"][a].get<long>() <= 0) fail(where + ".n must be positive integers");
            n[a] = j["n"][a].get<std::size_t>();
        }
    } else {
        if (!j["n"].is_number_integer() || j["n"].get<long>() <= 0) fail(where + ".n must be a positive integer");
        n.fill(j["n"].get<std::size_t>());
    }
    if (j["L"].is_array()) {
        L = vec3(j["L"], where + ".L");
        for (double x : L)
            if (!(x > 0.0)) fail(where + ".L must be positive");
    } else {
        L.fill(positive(j["L"], where + ".L"));
    }
    const Grid3 g(n, L);
    try {
        g.require_spectral();
    } catch (const Error& e) {
        fail(where + ": " + e.what());
    }
    return g;
}

FactorSpec factor(const json& j, const std::string& where) {
    only_keys(j, where, {"type", "sigma0", "q0", "p0", "omega", "coefficients"});
    FactorSpec f;
    const std::string type = j.value("type", "gaussian");
    if (type == "gaussian") {
        f.kind = FactorSpec::Kind::Gaussian;
        if (j.contains("sigma0")) f.sigma0 = positive(j["sigma0"], where + ".sigma0");
        if (j.contains("q0")) f.q0 = number(j["q0"], where + ".q0");
        if (j.contains("p0")) f.p0 = number(j["p0"], where + ".p0");
    } else if (type == "oscillator") {
        f.kind = FactorSpec::Kind::Oscillator;
        if (j.contains("omega")) f.omega = positive(j["omega"], where + ".omega");
        if (j.contains("coefficients")) f.coefficients = coefficients(j["coefficients"], where + ".coefficients");
    } else {
        fail(where + ".type must be gaussian or oscillator");
    }
    return f;
}

StateSpec state(const json& j, double& time) {
    only_keys(j, "state", {"kind", "sigma0", "q0", "p0", "omega", "terms", "axis", "coefficients", "factors", "t"});
    if (!j.contains("kind") || !j["kind"].is_string()) fail("state.kind is required");
    StateSpec s;
    try {
        s.kind = state_kind_from_string(j["kind"].get<std::string>());
    } catch (const Error& e) {
        fail(e.what());
    }
    if (j.contains("t")) time = number(j["t"], "state.t");
    switch (s.kind) {
        case StateKind::GaussianPacket:
            only_keys(j, "gaussian_packet state", {"kind", "sigma0", "q0", "p0", "t"});
            if (j.contains("sigma0")) s.sigma0 = positive(j["sigma0"], "state.sigma0");
            if (j.contains("q0")) s.q0 = vec3(j["q0"], "state.q0");
            if (j.contains("p0")) s.p0 = vec3(j["p0"], "state.p0");
            break;
        case StateKind::HoSuperposition: {
            only_keys(j, "ho_superposition state", {"kind", "omega", "terms", "axis", "coefficients", "t"});
            const double omega = j.contains("omega") ? positive(j["omega"], "state.omega") : 1.0;
            if (j.contains("terms") == j.contains("coefficients")) fail("ho_superposition needs exactly one of terms or coefficients");
            if (j.contains("terms")) {
                if (!j["terms"].is_array()) fail("state.terms must be an array");
                std::vector<HoTerm> terms;
                for (const auto& t : j["terms"]) {
                    only_keys(t, "state.terms[]", {"n", "c"});
                    HoTerm term;
                    if (!t.contains("n") || !t["n"].is_array() || t["n"].size() != 3) fail("state.terms[].n must be 3 integers");
                    for (int a = 0; a < 3; ++a) {
                        if (!t["n"][a].is_number_integer()) fail("state.terms[].n must be integers");
                        term.n[a] = t["n"][a].get<int>();
                    }
                    if (t.contains("c")) term.c = complex_value(t["c"], "state.terms[].c");
                    terms.push_back(term);
                }
                s = StateSpec::ho(std::move(terms), omega);
            } else {
                int axis = 0;
                if (j.contains("axis")) {
                    if (!j["axis"].is_number_integer()) fail("state.axis must be 0, 1 or 2");
                    axis = j["axis"].get<int>();
                }
                try {
                    s = StateSpec::ho_axis(axis, coefficients(j["coefficients"], "state.coefficients"), omega);
                } catch (const Error& e) {
                    fail(e.what());
                }
            }
            break;
        }
        case StateKind::ProductState: {
            only_keys(j, "product_state state", {"kind", "factors", "t"});
            if (!j.contains("factors") || !j["factors"].is_array() || j["factors"].size() != 3) {
                fail("state.factors must list 3 factors");
            }
            s = StateSpec::product({factor(j["factors"][0], "state.factors[0]"), factor(j["factors"][1], "state.factors[1]"),
                                    factor(j["factors"][2], "state.factors[2]")});
            break;
        }
    }
    try {
        s.validate();
    } catch (const Error& e) {
        fail(std::string("state: ") + e.what());
    }
    return s;
}

AxisSelection axis_selection(const json& v, const std::string& where) {
    AxisSelection s;
    if (v.is_string()) {
        if (v.get<std::string>() != "all") fail(where + " must be \"all\", a coordinate or a list of coordinates");
        return s;
    }
    s.all = false;
    if (v.is_number()) {
        s.coords.push_back(v.get<double>());
    } else if (v.is_array() && !v.empty()) {
        for (const auto& x : v) s.coords.push_back(number(x, where));
    } else {
        fail(where + " must be \"all\", a coordinate or a list of coordinates");
    }
    return s;
}

std::array<AxisSelection, 3> selection3(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) fail(where + " must list 3 axis selections");
    return {axis_selection(v[0], where + "[0]"), axis_selection(v[1], where + "[1]"), axis_selection(v[2], where + "[2]")};
}

const std::map<std::string, std::set<std::string>>& scenario_params() {
    static const std::map<std::string, std::set<std::string>> table{
        {"continuity", {"times", "lambdas", "directions", "random_directions"}},
        {"current-compare", {}},
        {"kernel-admissibility", {}},
        {"wigner", {}},
        {"distribution", {"moment_check"}},
        {"kinetic", {"b_vectors", "random_b"}},
        {"interdependence", {"b", "q", "factor_p_grid", "factor_q_grid"}},
        {"dbb", {"b", "tau", "thetas"}},
    };
    return table;
}

}  // namespace

std::vector<std::string> scenario_names() {
    std::vector<std::string> out;
    for (const auto& [name, keys] : scenario_params()) {
        (void)keys;
        out.push_back(name);
    }
    return out;
}

ScenarioConfig parse_config(const json& j) {
    only_keys(j, "config",
              {"scenario", "state", "kernel", "grid", "p_grid", "constants", "numerics", "selection", "params", "expect",
               "seed", "output"});
    ScenarioConfig c;
    if (!j.contains("scenario") || !j["scenario"].is_string()) fail("scenario is required");
    c.scenario = j["scenario"].get<std::string>();
    const auto& table = scenario_params();
    const auto it = table.find(c.scenario);
    if (it == table.end()) fail("unknown scenario '" + c.scenario + "'");

    if (j.contains("constants")) {
        only_keys(j["constants"], "constants", {"hbar", "mass"});
        if (j["constants"].contains("hbar")) c.constants.hbar = positive(j["constants"]["hbar"], "constants.hbar");
        if (j["constants"].contains("mass")) c.constants.mass = positive(j["constants"]["mass"], "constants.mass");
    }
    if (j.contains("state")) c.state = state(j["state"], c.time);
    if (j.contains("kernel")) {
        const json& k = j["kernel"];
        only_keys(k, "kernel", {"name", "b", "c", "k", "sigma0"});
        if (!k.contains("name") || !k["name"].is_string()) fail("kernel.name is required");
        c.kernel_name = k["name"].get<std::string>();
        const auto names = builtin_names();
        if (std::find(names.begin(), names.end(), *c.kernel_name) == names.end()) {
            fail("unknown kernel '" + *c.kernel_name + "'");
        }
        if (k.contains("b")) c.kernel_params.b = vec3(k["b"], "kernel.b");
        if (k.contains("c")) c.kernel_params.c = positive(k["c"], "kernel.c");
        if (k.contains("k")) c.kernel_params.k = positive(k["k"], "kernel.k");
        if (k.contains("sigma0")) c.kernel_params.sigma0 = positive(k["sigma0"], "kernel.sigma0");
    }
    if (j.contains("grid")) c.grid = grid(j["grid"], "grid");
    if (j.contains("p_grid")) c.p_grid = grid(j["p_grid"], "p_grid");
    if (j.contains("numerics")) {
        const json& n = j["numerics"];
        only_keys(n, "numerics",
                  {"tol", "dt", "memory_cap", "leak_tol", "norm_tol", "p_leak_tol", "eps_den", "admissibility_tol",
                   "node_floor"});
        auto& o = c.numerics;
        if (n.contains("tol")) o.tol = positive(n["tol"], "numerics.tol");
        if (n.contains("dt")) o.dt = positive(n["dt"], "numerics.dt");
        if (n.contains("memory_cap")) {
            if (!n["memory_cap"].is_number_integer() || n["memory_cap"].get<long long>() <= 0) {
                fail("numerics.memory_cap must be a positive integer");
            }
            o.memory_cap = n["memory_cap"].get<std::size_t>();
        }
        if (n.contains("leak_tol")) o.leak_tol = positive(n["leak_tol"], "numerics.leak_tol");
        if (n.contains("norm_tol")) o.norm_tol = positive(n["norm_tol"], "numerics.norm_tol");
        if (n.contains("p_leak_tol")) o.p_leak_tol = positive(n["p_leak_tol"], "numerics.p_leak_tol");
        if (n.contains("eps_den")) o.eps_den = positive(n["eps_den"], "numerics.eps_den");
        if (n.contains("admissibility_tol")) o.admissibility_tol = positive(n["admissibility_tol"], "numerics.admissibility_tol");
        if (n.contains("node_floor")) o.node_floor = positive(n["node_floor"], "numerics.node_floor");
    }
    if (j.contains("selection")) {
        only_keys(j["selection"], "selection", {"q", "p"});
        if (j["selection"].contains("q")) c.q_selection = selection3(j["selection"]["q"], "selection.q");
        if (j["selection"].contains("p")) c.p_selection = selection3(j["selection"]["p"], "selection.p");
    }
    if (j.contains("params")) {
        if (!j["params"].is_object()) fail("params must be an object");
        for (const auto& [key, value] : j["params"].items()) {
            (void)value;
            if (!it->second.count(key)) fail("unknown key '" + key + "' in params for scenario " + c.scenario);
        }
        c.params = j["params"];
    }
    if (j.contains("expect")) {
        if (!j["expect"].is_object()) fail("expect must be an object of booleans");
        for (const auto& [key, value] : j["expect"].items()) {
            if (!value.is_boolean()) fail("expect." + key + " must be a boolean");
            c.expect[key] = value.get<bool>();
        }
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].get<std::int64_t>() < 0) fail("seed must be a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("output")) {
        only_keys(j["output"], "output", {"directory", "binary", "full_grid"});
        const json& o = j["output"];
        if (o.contains("directory")) {
            if (!o["directory"].is_string()) fail("output.directory must be a string");
            c.output_dir = o["directory"].get<std::string>();
        }
        if (o.contains("binary")) {
            if (!o["binary"].is_boolean()) fail("output.binary must be a boolean");
            c.binary = o["binary"].get<bool>();
        }
        if (o.contains("full_grid")) {
            if (!o["full_grid"].is_boolean()) fail("output.full_grid must be a boolean");
            c.full_grid = o["full_grid"].get<bool>();
        }
    }
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot read config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

}  // namespace phasecur

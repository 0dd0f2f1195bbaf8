#include "wkl/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "wkl/generic.hpp"

namespace wkl {

namespace {

using json = ordered_json;

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    void get(const char* key, int& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_integer()) throw ConfigError(join(path_, key) + ": expected an integer");
            out = v->get<int>();
        }
    }
    void get(const char* key, std::uint64_t& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_unsigned()) throw ConfigError(join(path_, key) + ": expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void get(const char* key, double& out) {
        if (const json* v = take(key)) {
            if (!v->is_number()) throw ConfigError(join(path_, key) + ": expected a number");
            out = v->get<double>();
        }
    }
    void get(const char* key, std::string& out) {
        if (const json* v = take(key)) {
            if (!v->is_string()) throw ConfigError(join(path_, key) + ": expected a string");
            out = v->get<std::string>();
        }
    }
    void get(const char* key, std::vector<double>& out) {
        if (const json* v = take(key)) {
            if (!v->is_array()) throw ConfigError(join(path_, key) + ": expected an array of numbers");
            std::vector<double> vals;
            for (const auto& x : *v) {
                if (!x.is_number()) throw ConfigError(join(path_, key) + ": expected an array of numbers");
                vals.push_back(x.get<double>());
            }
            out = std::move(vals);
        }
    }
    template <class Fn>
    void child(const char* key, Fn&& fn) {
        if (const json* v = take(key)) {
            Reader r(*v, join(path_, key));
            fn(r);
            r.finish();
        }
    }
    void require(const char* key) const {
        if (!j_.contains(key)) throw ConfigError(join(path_, key) + ": missing required key");
    }
    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) throw ConfigError(join(path_, k) + ": unknown key");
    }
    std::string key(const char* k) const { return join(path_, k); }

private:
    const json* take(const char* key) {
        used_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    std::string where() const { return path_.empty() ? "config" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

void check(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key + ": " + what);
}

}  // namespace

const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> cmds{"simulate", "grazing", "lemma31", "check-generic", "equilibrium",
                                               "oracle-compare"};
    return cmds;
}

json parse_strict_json(const std::string& text) {
    std::vector<std::set<std::string>> keys;
    json::parser_callback_t cb = [&keys](int, json::parse_event_t ev, json& parsed) {
        if (ev == json::parse_event_t::object_start) {
            keys.emplace_back();
        } else if (ev == json::parse_event_t::object_end) {
            keys.pop_back();
        } else if (ev == json::parse_event_t::key) {
            const auto k = parsed.get<std::string>();
            if (!keys.back().insert(k).second) throw ConfigError("duplicate key '" + k + "'");
        }
        return true;
    };
    try {
        return json::parse(text, cb);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("JSON parse error: ") + e.what());
    }
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = parse_strict_json(text);
    } catch (const ConfigError&) {
        value = text;
    }
    json* node = &doc;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) throw ConfigError("--set: empty component in '" + path + "'");
        parts.push_back(part);
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->is_object()) throw ConfigError("--set: '" + parts[i] + "' is not an object in '" + path + "'");
        node = &(*node)[parts[i]];
        if (node->is_null()) *node = json::object();
    }
    if (!node->is_object()) throw ConfigError("--set: cannot assign into '" + path + "'");
    (*node)[parts.back()] = value;
}

ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig c;
    Reader r(doc, "");
    r.require("command");
    r.get("command", c.command);
    bool known = false;
    for (const auto& k : known_commands()) known = known || k == c.command;
    check(known, "command", "unknown command '" + c.command + "'");

    r.get("model", c.model);
    try {
        c.model = to_string(parse_model(c.model));
    } catch (const std::invalid_argument&) {
        throw ConfigError("model: unknown model '" + c.model + "'");
    }
    r.child("grid", [&](Reader& g) {
        g.get("d", c.grid.d);
        g.get("n", c.grid.n);
        g.get("vmax", c.grid.vmax);
        check(c.grid.d == 2 || c.grid.d == 3, g.key("d"), "must be 2 or 3");
        check(c.grid.n >= 8 && c.grid.n <= 257, g.key("n"), "must lie in [8, 257]");
        check(c.grid.vmax > 0.0, g.key("vmax"), "must be positive");
    });
    r.child("kernel", [&](Reader& k) {
        k.get("gamma", c.kernel.gamma);
        k.get("angular", c.kernel.angular);
        k.get("theta0", c.kernel.theta0);
        k.get("sigma_nodes", c.kernel.sigma_nodes);
        check(std::isfinite(c.kernel.gamma) && c.kernel.gamma >= 0.0 && c.kernel.gamma <= 2.0, k.key("gamma"),
              "must lie in [0, 2]");
        check(c.kernel.angular == "constant" || c.kernel.angular == "inverse-square-cutoff", k.key("angular"),
              "must be 'constant' or 'inverse-square-cutoff'");
        check(c.kernel.theta0 > 0.0 && c.kernel.theta0 < 0.5 * std::numbers::pi, k.key("theta0"),
              "must lie in (0, pi/2)");
        check(c.kernel.sigma_nodes >= 4, k.key("sigma_nodes"), "must be at least 4");
    });
    if (c.command == "equilibrium") {
        r.require("mu");
        r.require("beta");
    }
    r.get("mu", c.mu);
    r.get("beta", c.beta);
    check(c.mu >= 0.0, "mu", "must be non-negative");
    check(c.beta > 0.0, "beta", "must be positive");
    r.child("sim", [&](Reader& s) {
        s.get("dt", c.sim.dt);
        s.get("t_end", c.sim.t_end);
        s.get("snapshot_stride", c.sim.snapshot_stride);
        s.get("f_min", c.sim.f_min);
        s.get("integrator", c.sim.integrator);
        s.get("tol_H_constant", c.sim.tol_H_constant);
        s.get("initial", c.sim.initial);
    });
    check(c.sim.dt > 0.0, "sim.dt", "must be positive");
    check(c.sim.t_end >= c.sim.dt, "sim.t_end", "must be at least sim.dt");
    check(c.sim.snapshot_stride >= 1, "sim.snapshot_stride", "must be at least 1");
    check(c.sim.f_min > 0.0, "sim.f_min", "must be positive");
    check(c.sim.integrator == "rk4" || c.sim.integrator == "euler", "sim.integrator", "must be 'rk4' or 'euler'");
    check(c.sim.tol_H_constant > 0.0, "sim.tol_H_constant", "must be positive");
    check(c.sim.initial == "mixture" || c.sim.initial == "rayleigh-jeans" || c.sim.initial == "gaussian",
          "sim.initial", "must be 'mixture', 'rayleigh-jeans' or 'gaussian'");
    r.child("grazing", [&](Reader& g) {
        g.get("epsilons", c.grazing.epsilons);
        g.get("theta_nodes", c.grazing.theta_nodes);
        g.get("p_nodes", c.grazing.p_nodes);
        g.get("sigma_nodes", c.grazing.sigma_nodes);
    });
    check(!c.grazing.epsilons.empty(), "grazing.epsilons", "must not be empty");
    for (double e : c.grazing.epsilons) check(e > 0.0 && e <= 1.0, "grazing.epsilons", "entries must lie in (0, 1]");
    check(c.grazing.theta_nodes >= 32, "grazing.theta_nodes", "must be at least 32");
    check(c.grazing.p_nodes >= 4, "grazing.p_nodes", "must be at least 4");
    check(c.grazing.sigma_nodes >= 4, "grazing.sigma_nodes", "must be at least 4");
    r.child("lemma31", [&](Reader& l) {
        l.get("d", c.lemma31.d);
        if (c.lemma31.d == 3) {
            c.lemma31.v = {1.0, 0.0, 0.0};
            c.lemma31.v_star = {0.0, 1.0, 0.0};
        }
        l.get("thetas", c.lemma31.thetas);
        l.get("v", c.lemma31.v);
        l.get("v_star", c.lemma31.v_star);
        l.get("phi", c.lemma31.phi);
        l.get("p_nodes", c.lemma31.p_nodes);
    });
    check(c.lemma31.d == 2 || c.lemma31.d == 3, "lemma31.d", "must be 2 or 3");
    check(c.lemma31.thetas.size() >= 2, "lemma31.thetas", "needs at least two angles");
    for (double t : c.lemma31.thetas)
        check(t > 0.0 && t <= 0.5 * std::numbers::pi, "lemma31.thetas", "entries must lie in (0, pi/2]");
    check(c.lemma31.v.size() == std::size_t(c.lemma31.d), "lemma31.v", "needs lemma31.d components");
    check(c.lemma31.v_star.size() == std::size_t(c.lemma31.d), "lemma31.v_star", "needs lemma31.d components");
    check(c.lemma31.v != c.lemma31.v_star, "lemma31.v_star", "must differ from lemma31.v");
    check(c.lemma31.phi == "gaussian" || c.lemma31.phi == "affine" || c.lemma31.phi == "energy", "lemma31.phi",
          "must be 'gaussian', 'affine' or 'energy'");
    check(c.lemma31.p_nodes >= 4, "lemma31.p_nodes", "must be at least 4");
    r.child("check", [&](Reader& k) {
        k.get("trials", c.check.trials);
        k.get("jacobi_n", c.check.jacobi_n);
        k.get("jacobi_vmax", c.check.jacobi_vmax);
        k.child("phase", [&](Reader& p) {
            p.get("nx", c.check.phase.nx);
            p.get("nv", c.check.phase.nv);
            p.get("dv", c.check.phase.dv);
            p.get("Lx", c.check.phase.Lx);
            p.get("vmax", c.check.phase.vmax);
        });
    });
    check(c.check.trials >= 10, "check.trials", "must be at least 10");
    check(c.check.jacobi_n >= 8, "check.jacobi_n", "must be at least 8");
    check(c.check.jacobi_vmax > 0.0, "check.jacobi_vmax", "must be positive");
    check(c.check.phase.nx >= 8, "check.phase.nx", "must be at least 8");
    check(c.check.phase.nv >= 8, "check.phase.nv", "must be at least 8");
    check(c.check.phase.dv == 1 || c.check.phase.dv == 2, "check.phase.dv", "must be 1 or 2");
    check(c.check.phase.Lx > 0.0, "check.phase.Lx", "must be positive");
    check(c.check.phase.vmax > 0.0, "check.phase.vmax", "must be positive");
    r.child("oracle", [&](Reader& o) {
        o.get("n", c.oracle.n);
        o.get("vmax", c.oracle.vmax);
        o.get("eta4", c.oracle.eta4);
        o.get("eta3", c.oracle.eta3);
        o.get("speed_floor", c.oracle.speed_floor);
        o.get("sigma_nodes", c.oracle.sigma_nodes);
    });
    check(c.oracle.n >= 9 && c.oracle.n % 2 == 1 && c.oracle.n <= 65, "oracle.n", "must be odd and in [9, 65]");
    check(c.oracle.vmax > 0.0, "oracle.vmax", "must be positive");
    check(c.oracle.eta4 > 0.0, "oracle.eta4", "must be positive");
    check(c.oracle.eta3 > 0.0, "oracle.eta3", "must be positive");
    check(c.oracle.speed_floor >= 0.0, "oracle.speed_floor", "must be non-negative");
    check(c.oracle.sigma_nodes >= 4, "oracle.sigma_nodes", "must be at least 4");
    r.child("three_wave", [&](Reader& t) {
        t.get("v_min", c.three_wave.v_min);
        t.get("plane_spacing", c.three_wave.plane_spacing);
    });
    r.child("tolerances", [&](Reader& t) {
        auto& x = c.tolerances;
        t.get("rj_stationarity", x.rj_stationarity);
        t.get("antisymmetry", x.antisymmetry);
        t.get("symmetry", x.symmetry);
        t.get("min_rayleigh", x.min_rayleigh);
        t.get("degeneracy_MdE", x.degeneracy_MdE);
        t.get("refinement_ratio", x.refinement_ratio);
        t.get("fd_H", x.fd_H);
        t.get("mass_drift", x.mass_drift);
        t.get("energy_drift", x.energy_drift);
        t.get("grazing_terminal", x.grazing_terminal);
        t.get("path_consistency", x.path_consistency);
        t.get("lemma_slope", x.lemma_slope);
        t.get("oracle4", x.oracle4);
        t.get("oracle3", x.oracle3);
    });
    r.get("seed", c.seed);
    r.finish();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides,
                             const std::string& command) {
    json doc = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read config file " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        doc = parse_strict_json(ss.str());
    }
    if (!doc.is_object()) throw ConfigError("config: expected an object");
    if (!command.empty()) {
        if (doc.contains("command") && doc["command"] != command)
            throw ConfigError("command: config says " + doc["command"].dump() + " but '" + command + "' was requested");
        doc["command"] = command;
    }
    for (const auto& o : overrides) apply_override(doc, o);
    return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["command"] = c.command;
    j["model"] = c.model;
    j["grid"] = {{"d", c.grid.d}, {"n", c.grid.n}, {"vmax", c.grid.vmax}};
    j["kernel"] = {{"gamma", c.kernel.gamma},
                   {"angular", c.kernel.angular},
                   {"theta0", c.kernel.theta0},
                   {"sigma_nodes", c.kernel.sigma_nodes}};
    j["mu"] = c.mu;
    j["beta"] = c.beta;
    j["sim"] = {{"dt", c.sim.dt},
                {"t_end", c.sim.t_end},
                {"snapshot_stride", c.sim.snapshot_stride},
                {"f_min", c.sim.f_min},
                {"integrator", c.sim.integrator},
                {"tol_H_constant", c.sim.tol_H_constant},
                {"initial", c.sim.initial}};
    j["grazing"] = {{"epsilons", c.grazing.epsilons},
                    {"theta_nodes", c.grazing.theta_nodes},
                    {"p_nodes", c.grazing.p_nodes},
                    {"sigma_nodes", c.grazing.sigma_nodes}};
    j["lemma31"] = {{"d", c.lemma31.d},
                    {"thetas", c.lemma31.thetas},
                    {"v", c.lemma31.v},
                    {"v_star", c.lemma31.v_star},
                    {"phi", c.lemma31.phi},
                    {"p_nodes", c.lemma31.p_nodes}};
    j["check"] = {{"trials", c.check.trials},
                  {"jacobi_n", c.check.jacobi_n},
                  {"jacobi_vmax", c.check.jacobi_vmax},
                  {"phase",
                   {{"nx", c.check.phase.nx},
                    {"nv", c.check.phase.nv},
                    {"dv", c.check.phase.dv},
                    {"Lx", c.check.phase.Lx},
                    {"vmax", c.check.phase.vmax}}}};
    j["oracle"] = {{"n", c.oracle.n},
                   {"vmax", c.oracle.vmax},
                   {"eta4", c.oracle.eta4},
                   {"eta3", c.oracle.eta3},
                   {"speed_floor", c.oracle.speed_floor},
                   {"sigma_nodes", c.oracle.sigma_nodes}};
    j["three_wave"] = {{"v_min", c.three_wave.v_min}, {"plane_spacing", c.three_wave.plane_spacing}};
    const auto& t = c.tolerances;
    j["tolerances"] = {{"rj_stationarity", t.rj_stationarity},
                       {"antisymmetry", t.antisymmetry},
                       {"symmetry", t.symmetry},
                       {"min_rayleigh", t.min_rayleigh},
                       {"degeneracy_MdE", t.degeneracy_MdE},
                       {"refinement_ratio", t.refinement_ratio},
                       {"fd_H", t.fd_H},
                       {"mass_drift", t.mass_drift},
                       {"energy_drift", t.energy_drift},
                       {"grazing_terminal", t.grazing_terminal},
                       {"path_consistency", t.path_consistency},
                       {"lemma_slope", t.lemma_slope},
                       {"oracle4", t.oracle4},
                       {"oracle3", t.oracle3}};
    j["seed"] = c.seed;
    return j;
}

KernelSpec ExperimentConfig::kernel_spec() const {
    KernelSpec s;
    s.gamma = kernel.gamma;
    s.angular = base_beta(parse_angular_kind(kernel.angular), grid.d, kernel.theta0);
    return s;
}

SimConfig ExperimentConfig::sim_config() const {
    SimConfig s;
    s.model = parse_model(model);
    s.d = grid.d;
    s.n = grid.n;
    s.vmax = grid.vmax;
    s.spec = kernel_spec();
    s.sigma_nodes = kernel.sigma_nodes;
    s.three = {three_wave.v_min, three_wave.plane_spacing};
    s.dt = sim.dt;
    s.t_end = sim.t_end;
    s.snapshot_stride = sim.snapshot_stride;
    s.f_min = sim.f_min;
    s.integrator = parse_integrator(sim.integrator);
    s.tol_H_constant = sim.tol_H_constant;
    return s;
}

}  // namespace wkl

#include "wkl/experiments.hpp"

#include <cmath>
#include <cstdio>

#include "wkl/generic.hpp"
#include "wkl/io.hpp"
#include "wkl/limit.hpp"
#include "wkl/sim.hpp"

namespace wkl {

namespace {

namespace fs = std::filesystem;

CheckResult le(std::string name, double value, double tol) {
    return {std::move(name), value, tol, "<=", value <= tol};
}
CheckResult ge(std::string name, double value, double tol) {
    return {std::move(name), value, tol, ">=", value >= tol};
}
CheckResult flag(std::string name, bool ok) { return {std::move(name), ok ? 1.0 : 0.0, 1.0, "==", ok}; }

ordered_json checks_json(const std::vector<CheckResult>& checks) {
    ordered_json arr = ordered_json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name},
                       {"value", c.value},
                       {"relation", c.relation},
                       {"tolerance", c.tolerance},
                       {"pass", c.pass}});
    return arr;
}

Field gaussian(const GridPtr& grid, double s) {
    const int d = grid->d;
    return Field::from_function(grid, [d, s](const Vec& v) { return std::exp(-s * dot(v, v, d)); });
}

ordered_json functionals_json(const Functionals& fn, int d) {
    ordered_json p = ordered_json::array();
    for (int k = 0; k < d; ++k) p.push_back(fn.momentum[k]);
    return {{"mass", fn.mass},
            {"momentum", p},
            {"energy", fn.energy},
            {"energy_omega", fn.energy_omega},
            {"entropy_H", fn.entropy_H},
            {"entropy_B", fn.entropy_B}};
}

Field initial_field(const ExperimentConfig& cfg, const GridPtr& grid) {
    if (cfg.sim.initial == "rayleigh-jeans") return rayleigh_jeans(grid, cfg.mu, cfg.beta);
    if (cfg.sim.initial == "gaussian") return gaussian(grid, 1.0);
    return default_mixture(grid);
}

ExperimentOutcome run_equilibrium(const ExperimentConfig& cfg, const fs::path& out) {
    ExperimentOutcome res;
    const Model model = parse_model(cfg.model);
    auto grid = build_velocity_grid(cfg.grid.d, cfg.grid.n, cfg.grid.vmax);
    const KernelSpec spec = cfg.kernel_spec();
    const SphereRule rule = sphere_rule(cfg.grid.d - 1, cfg.kernel.sigma_nodes);
    Field f;
    std::string kind;
    if (model == Model::boltzmann) {
        // The Boltzmann equilibria are Maxwellians exp(-mu - beta |v|^2).
        f = Field::from_function(grid, [&](const Vec& v) { return std::exp(-cfg.mu - cfg.beta * dot(v, v, grid->d)); });
        kind = "maxwellian";
    } else {
        f = rayleigh_jeans(grid, cfg.mu, cfg.beta);
        kind = "rayleigh-jeans";
    }
    const BuildingBlocks blocks = make_blocks(model, grid, spec, rule);
    const CollisionOutput q = blocks.collision(f);
    const double qinf = norm_inf(q.q), finf = norm_inf(f);
    res.checks.push_back(le("relative_sup_norm", qinf / finf, cfg.tolerances.rj_stationarity));
    ordered_json extra;
    if (model == Model::wave3) {
        const auto qp = q3_apply(f, spec, rule, cfg.sim_config().three);
        extra = {{"pointwise_sup_norm", norm_inf(qp.q)}, {"skipped_nodes", qp.skipped_nodes}};
    }
    write_snapshot(out / "equilibrium.bin", f);
    res.report = {{"config", "effective-config.json"},
                  {"command", "equilibrium"},
                  {"model", to_string(model)},
                  {"state", kind},
                  {"mu", cfg.mu},
                  {"beta", cfg.beta},
                  {"snapshot", "equilibrium.bin"},
                  {"q_sup_norm", qinf},
                  {"f_sup_norm", finf},
                  {"dissipation", q.dissipation},
                  {"functionals", functionals_json(eval_functionals(f), grid->d)}};
    if (!extra.is_null()) res.report["three_wave_pointwise"] = extra;
    return res;
}

ExperimentOutcome run_check_generic(const ExperimentConfig& cfg, const fs::path&) {
    ExperimentOutcome res;
    const Model model = parse_model(cfg.model);
    const auto& t = cfg.tolerances;
    const auto& ph = cfg.check.phase;
    auto grid = build_velocity_grid(cfg.grid.d, cfg.grid.n, cfg.grid.vmax);
    auto phase = build_phase_grid(ph.nx, ph.Lx, ph.dv, ph.nv, ph.vmax);
    const BuildingBlocks blocks =
        make_blocks(model, grid, cfg.kernel_spec(), sphere_rule(cfg.grid.d - 1, cfg.kernel.sigma_nodes), phase);
    const Field f = gaussian(grid, 0.5);
    const StructureReport rep = check_structure(blocks, f, cfg.check.trials, cfg.seed);

    // Refinement of the O(h^2) quantities.
    auto phase2 = build_phase_grid(2 * ph.nx, ph.Lx, ph.dv, 2 * ph.nv, ph.vmax);
    const double lds2 = phase_degeneracy_LdS(default_phase_density(phase2));
    auto pj = build_phase_grid(cfg.check.jacobi_n, ph.Lx, ph.dv, cfg.check.jacobi_n, cfg.check.jacobi_vmax);
    auto pj2 = build_phase_grid(2 * cfg.check.jacobi_n, ph.Lx, ph.dv, 2 * cfg.check.jacobi_n, cfg.check.jacobi_vmax);
    const double jac1 = jacobi_residual(default_phase_density(pj), cfg.seed);
    const double jac2 = jacobi_residual(default_phase_density(pj2), cfg.seed);

    res.checks.push_back(le("antisymmetry_residual", rep.antisymmetry_residual, t.antisymmetry));
    res.checks.push_back(le("symmetry_residual", rep.symmetry_residual, t.symmetry));
    res.checks.push_back(ge("psd_min_rayleigh", rep.psd_min_rayleigh, t.min_rayleigh));
    const ordered_json refinement = {{"degeneracy_LdS_h", rep.degeneracy_LdS},
                               {"degeneracy_LdS_h2", lds2},
                               {"degeneracy_LdS_ratio", rep.degeneracy_LdS / lds2},
                               {"jacobi_n", cfg.check.jacobi_n},
                               {"jacobi_vmax", cfg.check.jacobi_vmax},
                               {"jacobi_residual_h", jac1},
                               {"jacobi_residual_h2", jac2},
                               {"jacobi_ratio", jac1 / jac2}};
    res.checks.push_back(le("degeneracy_MdE", rep.degeneracy_MdE, t.degeneracy_MdE));
    res.checks.push_back(ge("degeneracy_LdS_ratio", rep.degeneracy_LdS / lds2, t.refinement_ratio));
    res.checks.push_back(ge("jacobi_ratio", jac1 / jac2, t.refinement_ratio));

    res.report = {{"config", "effective-config.json"},
                  {"command", "check-generic"},
                  {"model", to_string(model)},
                  {"trials", cfg.check.trials},
                  {"seed", cfg.seed},
                  {"structure",
                   {{"antisymmetry_residual", rep.antisymmetry_residual},
                    {"symmetry_residual", rep.symmetry_residual},
                    {"psd_min_rayleigh", rep.psd_min_rayleigh},
                    {"degeneracy_LdS", rep.degeneracy_LdS},
                    {"degeneracy_MdE", rep.degeneracy_MdE},
                    {"jacobi_residual", rep.jacobi_residual},
                    {"h_velocity", rep.h_velocity},
                    {"h_phase_x", rep.h_phase_x},
                    {"h_phase_v", rep.h_phase_v}}},
                  {"refinement", refinement}};
    return res;
}

ExperimentOutcome run_simulate(const ExperimentConfig& cfg, const fs::path& out) {
    ExperimentOutcome res;
    const SimConfig sc = cfg.sim_config();
    sc.validate();
    const BuildingBlocks blocks = blocks_for(sc);
    const Field f0 = initial_field(cfg, blocks.grid);
    const SimResult sim = run_simulation(sc, blocks, f0);
    const auto& s = sim.series;
    const std::size_t K = s.size() - 1;

    ordered_json manifest = {{"format", "int64 d, int64 n, float64 vmax, then float64 values, little endian"},
                             {"d", sc.d},
                             {"n", sc.n},
                             {"vmax", sc.vmax},
                             {"snapshots", ordered_json::array()}};
    for (std::size_t k = 0; k < sim.snapshots.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%05zu.bin", k);
        write_snapshot(out / "snapshots" / name, sim.snapshots[k]);
        manifest["snapshots"].push_back({{"index", k}, {"t", s.times[k]}, {"file", name}});
    }
    write_json(out / "snapshots" / "manifest.json", manifest);
    write_series_csv(out / "series.csv", s);

    const double mass_drift = std::abs(s.mass[K] - s.mass[0]) / s.mass[0];
    const double energy_drift = std::abs(s.energy[K] - s.energy[0]) / s.energy[0];
    double mom_drift = 0.0;
    for (int c = 0; c < sc.d; ++c) mom_drift = std::max(mom_drift, std::abs(s.momentum[K][c] - s.momentum[0][c]));
    res.checks.push_back(le("entropy_warnings", static_cast<double>(sim.warnings.size()), 0.0));
    double fd = 0.0;
    if (s.size() >= 3) {
        fd = finite_diff_H_check(s);
        res.checks.push_back(le("finite_diff_H", fd, cfg.tolerances.fd_H));
    }
    if (sc.model != Model::wave3)
        res.checks.push_back(le("mass_drift", mass_drift,
                                cfg.tolerances.mass_drift + std::abs(s.dropped_mass[K]) / s.mass[0]));
    res.checks.push_back(le("energy_drift", energy_drift, cfg.tolerances.energy_drift));

    ordered_json warnings = ordered_json::array();
    for (const auto& w : sim.warnings) warnings.push_back({{"t", w.t}, {"decrease", w.decrease}, {"tolerance", w.tolerance}});
    const RJFit fit = fit_rayleigh_jeans(sim.snapshots.back());
    ordered_json drift = ordered_json::array();
    for (int c = 0; c < sc.d; ++c) drift.push_back(fit.drift[c]);
    res.report = {{"config", "effective-config.json"},
                  {"command", "simulate"},
                  {"model", to_string(sc.model)},
                  {"series", "series.csv"},
                  {"manifest", "snapshots/manifest.json"},
                  {"steps", sim.steps},
                  {"halvings", sim.halvings},
                  {"entropy_warnings", warnings},
                  {"strict_increase_violations", sim.strict_increase_violations},
                  {"finite_diff_H", fd},
                  {"mass_drift_relative", mass_drift},
                  {"momentum_drift", mom_drift},
                  {"energy_drift_relative", energy_drift},
                  {"dropped_mass", s.dropped_mass[K]},
                  {"terminal_fit",
                   {{"mu", fit.mu},
                    {"beta", fit.beta},
                    {"drift", drift},
                    {"converged", fit.converged},
                    {"relative_l2_distance", relative_l2(sim.snapshots.back(), fit.f)}}}};
    return res;
}

ExperimentOutcome run_grazing(const ExperimentConfig& cfg, const fs::path& out) {
    ExperimentOutcome res;
    auto grid = build_velocity_grid(cfg.grid.d, cfg.grid.n, cfg.grid.vmax);
    const Field f = default_mixture(grid);
    GrazingOptions opt;
    opt.theta_nodes = cfg.grazing.theta_nodes;
    opt.p_nodes = cfg.grazing.p_nodes;
    opt.sigma_nodes = cfg.grazing.sigma_nodes;
    const ConvergenceReport rep = grazing_convergence(f, cfg.kernel_spec(), cfg.grazing.epsilons, opt);
    res.checks.push_back(flag("monotone", rep.monotone));
    res.checks.push_back(le("terminal_error", rep.errors.back(), cfg.tolerances.grazing_terminal));
    res.checks.push_back(le("path_consistency", rep.path_consistency, cfg.tolerances.path_consistency));

    std::FILE* csv = std::fopen((out / "grazing.csv").c_str(), "w");
    if (!csv) throw std::runtime_error("cannot write grazing.csv");
    std::fprintf(csv, "epsilon,error,abs_error\n");
    for (std::size_t i = 0; i < rep.errors.size(); ++i)
        std::fprintf(csv, "%s,%s,%s\n", format_double(rep.epsilons[i]).c_str(), format_double(rep.errors[i]).c_str(),
                     format_double(rep.abs_errors[i]).c_str());
    std::fclose(csv);
    res.report = {{"config", "effective-config.json"},
                  {"command", "grazing"},
                  {"csv", "grazing.csv"},
                  {"epsilons", rep.epsilons},
                  {"errors", rep.errors},
                  {"abs_errors", rep.abs_errors},
                  {"observed_rates", rep.observed_rates},
                  {"monotone", rep.monotone},
                  {"path_consistency", rep.path_consistency},
                  {"landau_norm", rep.landau_norm},
                  {"quadrature",
                   {{"theta_nodes", rep.theta_nodes}, {"p_nodes", rep.p_nodes}, {"sigma_nodes", rep.sigma_nodes}}}};
    return res;
}

ExperimentOutcome run_lemma(const ExperimentConfig& cfg, const fs::path& out) {
    ExperimentOutcome res;
    const auto& L = cfg.lemma31;
    const int d = L.d;
    Vec v{0, 0, 0}, vs{0, 0, 0};
    for (int k = 0; k < d; ++k) {
        v[k] = L.v[k];
        vs[k] = L.v_star[k];
    }
    const AnalyticFn f = gaussian_fn({0.3, -0.2, 0.1}, 1.0, 1.0, d, 0.1);
    AnalyticFn phi;
    if (L.phi == "affine") phi = affine_fn({0.7, -0.3, 0.2}, 0.5, d);
    else if (L.phi == "energy") phi = energy_fn(d);
    else phi = gaussian_fn({-0.5, 0.4, 0.2}, 1.3, 1.0, d);
    const LemmaCheck chk = lemma31_check(f, phi, v, vs, L.thetas, d, L.p_nodes);
    if (L.phi == "gaussian") {
        res.checks.push_back(flag("ratios_decreasing", chk.ratios_decreasing));
        res.checks.push_back(ge("slope", chk.slope, cfg.tolerances.lemma_slope));
    } else {
        double worst = 0.0;
        for (std::size_t i = 0; i < chk.thetas.size(); ++i)
            worst = std::max({worst, std::abs(chk.lhs[i]), std::abs(chk.rhs[i])});
        res.checks.push_back(le("invariant_lhs_rhs", worst, 1e-12));
    }
    std::FILE* csv = std::fopen((out / "lemma31.csv").c_str(), "w");
    if (!csv) throw std::runtime_error("cannot write lemma31.csv");
    std::fprintf(csv, "theta,lhs,rhs,error,ratio\n");
    for (std::size_t i = 0; i < chk.thetas.size(); ++i)
        std::fprintf(csv, "%s,%s,%s,%s,%s\n", format_double(chk.thetas[i]).c_str(), format_double(chk.lhs[i]).c_str(),
                     format_double(chk.rhs[i]).c_str(), format_double(chk.errors[i]).c_str(),
                     format_double(chk.ratios[i]).c_str());
    std::fclose(csv);
    res.report = {{"config", "effective-config.json"},
                  {"command", "lemma31"},
                  {"csv", "lemma31.csv"},
                  {"d", d},
                  {"phi", L.phi},
                  {"thetas", chk.thetas},
                  {"lhs", chk.lhs},
                  {"rhs", chk.rhs},
                  {"errors", chk.errors},
                  {"ratios", chk.ratios},
                  {"slope", chk.slope},
                  {"ratios_decreasing", chk.ratios_decreasing}};
    return res;
}

ExperimentOutcome run_oracle(const ExperimentConfig& cfg, const fs::path&) {
    ExperimentOutcome res;
    const auto& o = cfg.oracle;
    auto grid = build_velocity_grid(2, o.n, o.vmax);
    KernelSpec spec;
    spec.gamma = cfg.kernel.gamma;
    spec.angular = base_beta(parse_angular_kind(cfg.kernel.angular), 2, cfg.kernel.theta0);
    const SphereRule rule = sphere_rule(1, o.sigma_nodes);
    const Field f = gaussian(grid, 1.0);

    const Field q4 = q4_apply(f, spec, rule).q;
    const Field o4 = oracle_q_mollified(f, spec, o.eta4, WaveKind::four);
    const double e4 = relative_l2(q4, o4);

    const auto q3 = q3_apply(f, spec, rule, cfg.sim_config().three);
    const Field o3 = oracle_q_mollified(f, spec, o.eta3, WaveKind::three);
    std::vector<bool> mask(grid->count);
    for (std::size_t a = 0; a < grid->count; ++a) {
        const Vec v = grid->node(a);
        mask[a] = std::sqrt(dot(v, v, 2)) >= o.speed_floor;
    }
    const double e3 = relative_l2(q3.q, o3, mask);
    res.checks.push_back(le("wave4_relative_l2", e4, cfg.tolerances.oracle4));
    res.checks.push_back(le("wave3_relative_l2", e3, cfg.tolerances.oracle3));
    res.report = {{"config", "effective-config.json"},
                  {"command", "oracle-compare"},
                  {"grid", {{"d", 2}, {"n", o.n}, {"vmax", o.vmax}}},
                  {"wave4", {{"eta", o.eta4}, {"relative_l2", e4}}},
                  {"wave3",
                   {{"eta", o.eta3},
                    {"speed_floor", o.speed_floor},
                    {"relative_l2", e3},
                    {"skipped_nodes", q3.skipped_nodes}}}};
    return res;
}

}  // namespace

bool ExperimentOutcome::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

int exit_code(const ExperimentOutcome& outcome) { return outcome.all_pass() ? 0 : 2; }

double relative_l2(const Field& a, const Field& ref, const std::vector<bool>& mask) {
    require_same_grid(a, ref);
    const auto& W = a.grid().weights;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        num += W[i] * (a[i] - ref[i]) * (a[i] - ref[i]);
        den += W[i] * ref[i] * ref[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const fs::path& out) {
    fs::create_directories(out);
    write_json(out / "effective-config.json", to_json(cfg));
    ExperimentOutcome res;
    if (cfg.command == "equilibrium") res = run_equilibrium(cfg, out);
    else if (cfg.command == "check-generic") res = run_check_generic(cfg, out);
    else if (cfg.command == "simulate") res = run_simulate(cfg, out);
    else if (cfg.command == "grazing") res = run_grazing(cfg, out);
    else if (cfg.command == "lemma31") res = run_lemma(cfg, out);
    else if (cfg.command == "oracle-compare") res = run_oracle(cfg, out);
    else throw ConfigError("command: unknown command '" + cfg.command + "'");
    res.report["checks"] = checks_json(res.checks);
    res.report["pass"] = res.all_pass();
    const std::string name = cfg.command == "check-generic" ? "structure" : cfg.command;
    write_json(out / (name + ".json"), res.report);
    return res;
}

}  // namespace wkl

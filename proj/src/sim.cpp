#include "wkl/sim.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wkl {

Integrator parse_integrator(const std::string& name) {
    if (name == "rk4") return Integrator::rk4;
    if (name == "euler") return Integrator::euler;
    throw std::invalid_argument("unknown integrator '" + name + "'");
}

std::string to_string(Integrator i) { return i == Integrator::rk4 ? "rk4" : "euler"; }

void SimConfig::validate() const {
    if (d != 2 && d != 3) throw std::invalid_argument("grid.d: must be 2 or 3");
    if (n < 8) throw std::invalid_argument("grid.n: must be at least 8");
    if (!(vmax > 0.0)) throw std::invalid_argument("grid.vmax: must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("sim.dt: must be positive");
    if (!(t_end >= dt)) throw std::invalid_argument("sim.t_end: must be at least sim.dt");
    if (snapshot_stride < 1) throw std::invalid_argument("sim.snapshot_stride: must be at least 1");
    if (!(f_min > 0.0)) throw std::invalid_argument("sim.f_min: must be positive");
    if (!(tol_H_constant > 0.0)) throw std::invalid_argument("sim.tol_H_constant: must be positive");
    if (sigma_nodes < 4) throw std::invalid_argument("kernel.sigma_nodes: must be at least 4");
}

Field rayleigh_jeans(const GridPtr& grid, double mu, double beta) {
    if (!(mu >= 0.0)) throw std::invalid_argument("rayleigh-jeans: mu must be non-negative");
    if (!(beta > 0.0)) throw std::invalid_argument("rayleigh-jeans: beta must be positive");
    const int d = grid->d;
    Field f(grid);
    for (std::size_t a = 0; a < f.size(); ++a) {
        const Vec v = grid->node(a);
        const double den = mu + beta * dot(v, v, d);
        if (!(den > 0.0)) throw std::domain_error("rayleigh-jeans: pole at a grid node (mu = 0 with v = 0 on the grid)");
        f[a] = 1.0 / den;
    }
    return f;
}

BuildingBlocks blocks_for(const SimConfig& cfg) {
    auto grid = build_velocity_grid(cfg.d, cfg.n, cfg.vmax);
    return make_blocks(cfg.model, grid, cfg.spec, sphere_rule(cfg.d - 1, cfg.sigma_nodes));
}

Rhs make_rhs(const BuildingBlocks& blocks, const ThreeWaveOptions& three) {
    if (blocks.model == Model::wave3) {
        return [&blocks, three](const Field& f) { return q3_apply(f, blocks.spec, blocks.rule, three); };
    }
    return [&blocks](const Field& f) { return blocks.collision(f); };
}

namespace {

// Returns the first node at or below the floor, or npos.
std::size_t first_below(const Field& f, double f_min) {
    for (std::size_t a = 0; a < f.size(); ++a)
        if (!(f[a] > f_min)) return a;
    return static_cast<std::size_t>(-1);
}

bool try_step(const Field& f, double dt, Integrator integ, const Rhs& rhs, const CollisionOutput& k1,
              double f_min, Field& out, double& dropped) {
    try {
        if (integ == Integrator::euler) {
            out = axpy(dt, k1.q, f);
            dropped = dt * k1.dropped_mass;
        } else {
            const auto k2 = rhs(axpy(0.5 * dt, k1.q, f));
            const auto k3 = rhs(axpy(0.5 * dt, k2.q, f));
            const auto k4 = rhs(axpy(dt, k3.q, f));
            out = f;
            for (std::size_t a = 0; a < f.size(); ++a)
                out[a] += dt / 6.0 * (k1.q[a] + 2.0 * k2.q[a] + 2.0 * k3.q[a] + k4.q[a]);
            dropped = dt / 6.0 * (k1.dropped_mass + 2.0 * k2.dropped_mass + 2.0 * k3.dropped_mass + k4.dropped_mass);
        }
    } catch (const std::domain_error&) {
        return false;  // an intermediate stage lost positivity
    }
    return first_below(out, f_min) == static_cast<std::size_t>(-1);
}

}  // namespace

StepResult step(const Field& f, double dt, Integrator integrator, const Rhs& rhs, double f_min,
                const CollisionOutput* k1) {
    const auto bad = first_below(f, f_min);
    if (bad != static_cast<std::size_t>(-1))
        throw PositivityError("step: input violates the positivity floor", bad, f[bad]);
    CollisionOutput own;
    if (!k1) {
        own = rhs(f);
        k1 = &own;
    }
    StepResult res;
    double h = dt;
    for (int k = 0; k <= 8; ++k, h *= 0.5) {
        Field out;
        double dropped = 0.0;
        if (try_step(f, h, integrator, rhs, *k1, f_min, out, dropped)) {
            res.f = std::move(out);
            res.dt_used = h;
            res.halvings = k;
            res.dropped = dropped;
            return res;
        }
    }
    // Report the node that fails at the smallest step.
    Field last = axpy(h * 2.0, k1->q, f);
    std::size_t node = first_below(last, f_min);
    if (node == static_cast<std::size_t>(-1)) node = 0;
    throw PositivityError("step: positivity lost after 8 halvings at node " + std::to_string(node), node, last[node]);
}

double InvariantSeries::entropy(std::size_t k) const {
    return model == Model::boltzmann ? -entropy_B[k] : entropy_H[k];
}

void InvariantSeries::append(double t, const Field& f, double diss, double dropped) {
    if (!times.empty() && !(t > times.back())) throw std::logic_error("series times must increase");
    const auto fn = eval_functionals(f);
    times.push_back(t);
    mass.push_back(fn.mass);
    momentum.push_back(fn.momentum);
    energy.push_back(fn.energy);
    entropy_H.push_back(fn.entropy_H);
    entropy_B.push_back(fn.entropy_B);
    dissipation.push_back(diss);
    dropped_mass.push_back(dropped);
}

SimResult run_simulation(const SimConfig& cfg, const Field& f0) {
    cfg.validate();
    const BuildingBlocks blocks = blocks_for(cfg);
    if (f0.grid().n != cfg.n || f0.grid().d != cfg.d) throw std::invalid_argument("initial field does not match grid");
    // Rebind the initial data to the blocks' grid.
    return run_simulation(cfg, blocks, Field(blocks.grid, f0.values()));
}

SimResult run_simulation(const SimConfig& cfg, const BuildingBlocks& blocks, const Field& f0) {
    cfg.validate();
    const Rhs rhs = make_rhs(blocks, cfg.three);
    SimResult res;
    res.series.model = blocks.model;
    res.series.d = blocks.grid->d;

    Field f = f0;
    double t = 0.0, dropped = 0.0, max_diss = 0.0;
    std::size_t since_snapshot = 0;
    CollisionOutput k1 = rhs(f);
    const double D = inner(blocks.dS(f), k1.q);
    double S = blocks.entropy(f);
    res.snapshots.push_back(f);
    res.series.append(t, f, D, dropped);
    max_diss = std::abs(D);

    const double t_eps = 1e-9 * cfg.dt;  // absorbs accumulated rounding so no sliver step is taken
    while (t < cfg.t_end - t_eps) {
        const double h = std::min(cfg.dt, cfg.t_end - t);
        StepResult st = step(f, h, cfg.integrator, rhs, cfg.f_min, &k1);
        f = std::move(st.f);
        t += st.dt_used;
        if (cfg.t_end - t < t_eps) t = cfg.t_end;
        dropped += st.dropped;
        ++res.steps;
        res.halvings += st.halvings;

        k1 = rhs(f);
        const double D_new = inner(blocks.dS(f), k1.q);
        const double S_new = blocks.entropy(f);
        max_diss = std::max(max_diss, std::abs(D_new));
        const double tol = cfg.tol_H_constant * st.dt_used * max_diss;
        if (S_new < S - tol) res.warnings.push_back({t, S - S_new, tol});
        if (!(S_new > S)) ++res.strict_increase_violations;
        S = S_new;

        ++since_snapshot;
        if (since_snapshot == static_cast<std::size_t>(cfg.snapshot_stride) || t >= cfg.t_end) {
            res.snapshots.push_back(f);
            res.series.append(t, f, D_new, dropped);
            since_snapshot = 0;
        }
    }
    return res;
}

double finite_diff_H_check(const InvariantSeries& s) {
    const std::size_t K = s.size();
    if (K < 3) throw std::invalid_argument("finite-difference entropy check needs at least 3 snapshots");
    double maxD = 0.0, maxdev = 0.0;
    for (std::size_t k = 0; k < K; ++k) maxD = std::max(maxD, std::abs(s.dissipation[k]));
    for (std::size_t k = 1; k + 1 < K; ++k) {
        const double t0 = s.times[k - 1], t1 = s.times[k], t2 = s.times[k + 1];
        const double c0 = (t1 - t2) / ((t0 - t1) * (t0 - t2));
        const double c1 = (2 * t1 - t0 - t2) / ((t1 - t0) * (t1 - t2));
        const double c2 = (t1 - t0) / ((t2 - t0) * (t2 - t1));
        const double dS = c0 * s.entropy(k - 1) + c1 * s.entropy(k) + c2 * s.entropy(k + 1);
        maxdev = std::max(maxdev, std::abs(dS - s.dissipation[k]));
    }
    return maxD > 0.0 ? maxdev / maxD : maxdev;
}

RJFit fit_rayleigh_jeans(const Field& f) {
    const auto& grid = f.grid();
    const int d = grid.d;
    const int m = d + 2;
    const std::size_t N = f.size();
    std::vector<Eigen::VectorXd> phi(N, Eigen::VectorXd(m));
    for (std::size_t a = 0; a < N; ++a) {
        const Vec v = grid.node(a);
        phi[a](0) = 1.0;
        for (int k = 0; k < d; ++k) phi[a](1 + k) = v[k];
        phi[a](d + 1) = dot(v, v, d);
    }
    Eigen::VectorXd target = Eigen::VectorXd::Zero(m);
    double area = 0.0;
    for (std::size_t a = 0; a < N; ++a) {
        target += grid.weights[a] * f[a] * phi[a];
        area += grid.weights[a];
    }
    auto residual = [&](const Eigen::VectorXd& c, Eigen::VectorXd& F, Eigen::MatrixXd* J) {
        F = -target;
        if (J) J->setZero(m, m);
        for (std::size_t a = 0; a < N; ++a) {
            const double den = c.dot(phi[a]);
            if (!(den > 0.0)) return false;
            const double g = 1.0 / den;
            F += grid.weights[a] * g * phi[a];
            if (J) *J -= grid.weights[a] * g * g * phi[a] * phi[a].transpose();
        }
        return true;
    };
    Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
    c(0) = area / target(0);
    RJFit fit;
    Eigen::VectorXd F;
    Eigen::MatrixXd J;
    residual(c, F, &J);
    for (int it = 0; it < 200; ++it) {
        const double scale = target.cwiseAbs().maxCoeff();
        if (F.cwiseAbs().maxCoeff() <= 1e-13 * scale) {
            fit.converged = true;
            break;
        }
        const Eigen::VectorXd delta = J.ldlt().solve(-F);
        double step = 1.0;
        Eigen::VectorXd Fn;
        bool ok = false;
        for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
            const Eigen::VectorXd cn = c + step * delta;
            if (residual(cn, Fn, nullptr) && Fn.norm() < F.norm()) {
                c = cn;
                ok = true;
                break;
            }
        }
        fit.iterations = it + 1;
        if (!ok) break;
        residual(c, F, &J);
    }
    fit.beta = c(d + 1);
    for (int k = 0; k < d; ++k) fit.drift[k] = fit.beta != 0.0 ? -c(1 + k) / (2.0 * fit.beta) : 0.0;
    fit.mu = c(0) - fit.beta * dot(fit.drift, fit.drift, d);
    fit.f = Field(f.grid_ptr());
    for (std::size_t a = 0; a < N; ++a) fit.f[a] = 1.0 / c.dot(phi[a]);
    return fit;
}

}  // namespace wkl

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wkl/generic.hpp"
#include "wkl/limit.hpp"
#include "wkl/sim.hpp"

using namespace wkl;

namespace {

KernelSpec constant_kernel() {
    KernelSpec s;
    s.angular = base_beta(AngularKind::constant, 2);
    return s;
}

BuildingBlocks blocks(Model m, int n = 13, double vmax = 4.0) {
    return make_blocks(m, build_velocity_grid(2, n, vmax), constant_kernel(), sphere_rule(1, 12));
}

Field maxwellian(const GridPtr& g) {
    return Field::from_function(g, [](const Vec& v) { return std::exp(-0.5 * (v[0] * v[0] + v[1] * v[1])); });
}

PhaseField phase_fn(const PhaseGridPtr& g, double (*fn)(double, double)) {
    PhaseField p{g, std::vector<double>(g->count)};
    for (std::size_t a = 0; a < g->count; ++a) p.values[a] = fn(g->x(a), g->v(a, 0));
    return p;
}

}  // namespace

TEST(Generic, ModelNamesRoundTrip) {
    for (auto m : {Model::wave3, Model::wave4, Model::boltzmann, Model::landau}) EXPECT_EQ(parse_model(to_string(m)), m);
    EXPECT_EQ(parse_model("landau"), Model::landau);
    EXPECT_THROW(parse_model("wave5"), std::invalid_argument);
}

TEST(Generic, PoissonOperatorIsExactlyAntisymmetric) {
    for (int dv : {1, 2}) {
        auto pg = build_phase_grid(16, 2 * std::numbers::pi, dv, 12, 4.0);
        EXPECT_LE(phase_antisymmetry(pg, 20, 3), 1e-12);
    }
}

TEST(Generic, PoissonOperatorAnnihilatesConstants) {
    auto pg = build_phase_grid(16, 2 * std::numbers::pi, 1, 16, 4.0);
    const PhaseField f = default_phase_density(pg);
    const PhaseField one{pg, std::vector<double>(pg->count, 1.0)};
    const PhaseField Lg = apply_L(f, one);
    for (double x : Lg.values) EXPECT_NEAR(x, 0.0, 1e-14);
}

TEST(Generic, PoissonOperatorMatchesContinuumBracketOnSmoothData) {
    // The adjoints are minus the derivatives, so L(f) g -> d_v (f d_x g) - d_x (f d_v g).
    std::vector<double> errs;
    for (int n : {32, 64}) {
        auto pg = build_phase_grid(n, 2 * std::numbers::pi, 1, n, 5.0);
        const PhaseField f = phase_fn(pg, [](double x, double v) { return std::exp(-v * v) * (1.0 + 0.3 * std::sin(x)); });
        const PhaseField g = phase_fn(pg, [](double x, double v) { return std::cos(x) * v * v; });
        const PhaseField Lg = apply_L(f, g);
        double e = 0.0;
        for (std::size_t a = 0; a < pg->count; ++a) {
            const double x = pg->x(a), v = pg->v(a, 0);
            if (std::abs(v) > 3.0) continue;
            const double m = std::exp(-v * v);
            // d_v(f (-sin x) v^2) - d_x(f 2v cos x)
            const double fx = 0.3 * std::cos(x) * m, fv = -2 * v * m * (1.0 + 0.3 * std::sin(x));
            const double fval = m * (1.0 + 0.3 * std::sin(x));
            const double exact = -(fx * 2 * v * std::cos(x) - fval * 2 * v * std::sin(x) +
                                   std::sin(x) * (fv * v * v + fval * 2 * v));
            e = std::max(e, std::abs(Lg.values[a] - exact));
        }
        errs.push_back(e);
    }
    EXPECT_LT(errs[1], 0.05);
    EXPECT_GE(errs[0] / errs[1], 3.0) << errs[0] << " " << errs[1];
}

TEST(Generic, EntropyDegeneracyOfPoissonOperatorVanishesUnderRefinement) {
    std::vector<double> lds, jac;
    for (int n : {16, 32, 64}) {
        lds.push_back(phase_degeneracy_LdS(default_phase_density(build_phase_grid(n, 2 * std::numbers::pi, 1, n, 5.0))));
        // A narrower box lets the coarsest grid resolve the density, so the ratios are asymptotic.
        jac.push_back(jacobi_residual(default_phase_density(build_phase_grid(n, 2 * std::numbers::pi, 1, n, 3.5)), 9));
    }
    for (int i = 0; i < 2; ++i) {
        EXPECT_GE(lds[i] / lds[i + 1], 3.0);
        EXPECT_GE(jac[i] / jac[i + 1], 3.0) << jac[i] << " " << jac[i + 1];
    }
}

TEST(Generic, DissipativeOperatorStructureAllModels) {
    for (auto m : {Model::wave4, Model::boltzmann, Model::landau, Model::wave3}) {
        const auto b = blocks(m);
        Field f = m == Model::wave3 ? Field::from_function(b.grid, [](const Vec& v) {
            return 0.2 + std::exp(-0.5 * (v[0] * v[0] + v[1] * v[1]));
        })
                                    : maxwellian(b.grid);
        if (m == Model::wave4 || m == Model::landau) f = default_mixture(b.grid);
        const auto rep = check_structure(b, f, 12, 7);
        EXPECT_LE(rep.symmetry_residual, 1e-10) << to_string(m);
        EXPECT_GE(rep.psd_min_rayleigh, -1e-12) << to_string(m);
        EXPECT_LE(rep.degeneracy_MdE, 1e-12) << to_string(m);
        EXPECT_LE(rep.antisymmetry_residual, 1e-12);
    }
    EXPECT_THROW(check_structure(blocks(Model::wave4), maxwellian(blocks(Model::wave4).grid), 5, 1),
                 std::invalid_argument);
}

TEST(Generic, DissipativeOperatorKillsCollisionInvariants) {
    for (auto m : {Model::wave4, Model::boltzmann, Model::landau}) {
        const auto b = blocks(m);
        const Field f = default_mixture(b.grid);
        const double scale = norm_inf(b.collision(f).q) + 1.0;
        for (auto phi : {Field(b.grid, 1.0), Field::from_function(b.grid, [](const Vec& v) { return v[0] - 2 * v[1]; }),
                         b.dE()})
            EXPECT_LE(norm_inf(apply_M(b, f, phi).q), 1e-12 * scale) << to_string(m);
    }
}

TEST(Generic, EntropyGradientDrivesTheCollisionOperator) {
    const auto b = blocks(Model::wave4);
    const Field f = default_mixture(b.grid);
    const auto direct = q4_apply(f, b.spec, b.rule);
    const auto via = b.collision(f);
    EXPECT_EQ(direct.q.values(), via.q.values());
    // dS is the derivative of S: directional finite difference.
    Rng rng(4);
    const Field dir = random_smooth_field(b.grid, rng);
    const double eps = 1e-6;
    Field fp = f, fm = f;
    for (std::size_t a = 0; a < f.size(); ++a) {
        fp[a] += eps * dir[a] * f[a];
        fm[a] -= eps * dir[a] * f[a];
    }
    Field fd(b.grid);
    for (std::size_t a = 0; a < f.size(); ++a) fd[a] = dir[a] * f[a];
    const double num = (b.entropy(fp) - b.entropy(fm)) / (2 * eps);
    EXPECT_NEAR(num, inner(b.dS(f), fd), 1e-6 * std::abs(num));
}

TEST(Generic, FunctionalsOfMaxwellian) {
    auto g = build_velocity_grid(2, 65, 8.0);
    const Functionals fn = eval_functionals(maxwellian(g));
    const double pi = std::numbers::pi;
    EXPECT_NEAR(fn.mass, 2 * pi, 1e-8);
    EXPECT_NEAR(fn.energy, 2 * pi, 1e-8);  // int |v|^2/2 e^{-|v|^2/2} = 2 pi
    EXPECT_NEAR(fn.momentum[0], 0.0, 1e-12);
    EXPECT_NEAR(fn.entropy_B, -2 * pi, 1e-8);  // int f log f = -int |v|^2/2 f
}

TEST(Generic, InvariantProjectionIsAnOrthogonalProjector) {
    auto g = build_velocity_grid(2, 13, 4.0);
    Rng rng(2);
    const Field y = random_smooth_field(g, rng);
    for (bool c : {true, false}) {
        const Field p = project_invariants(y, c);
        const Field pp = project_invariants(p, c);
        for (std::size_t a = 0; a < y.size(); ++a) EXPECT_NEAR(p[a], pp[a], 1e-12);
        const Field r = axpy(-1.0, p, y);
        EXPECT_NEAR(inner(r, Field::from_function(g, [](const Vec& v) { return v[1]; })), 0.0, 1e-12);
        EXPECT_NEAR(inner(r, Field::from_function(g, [](const Vec& v) { return v[0] * v[0] + v[1] * v[1]; })), 0.0,
                    1e-10);
    }
    EXPECT_GT(std::abs(inner(axpy(-1.0, project_invariants(y, false), y), Field(g, 1.0))), 1e-6);
}

TEST(Generic, InverseNormRecoversQuadraticForm) {
    const auto b = blocks(Model::wave4, 11, 4.0);
    const Field f = default_mixture(b.grid);
    Rng rng(8);
    const Field x = random_smooth_field(b.grid, rng);
    const Field y = apply_M(b, f, x).q;
    DeGiorgiOptions opt;
    opt.lambda = 0.0;
    const auto inv = inverse_norm_sq(b, f, y, opt);
    EXPECT_TRUE(inv.converged);
    EXPECT_NEAR(inv.value, inner(x, y), 1e-8 * inner(x, y));
    EXPECT_LT(inv.removed_fraction, 1e-10);
}

TEST(Generic, DeGiorgiResidualVanishesOnStationaryTrajectory) {
    const auto b = blocks(Model::wave4, 13, 4.0);
    const Field rj = rayleigh_jeans(b.grid, 1.0, 1.0);
    const auto r = degiorgi_residual({0.0, 0.1, 0.2, 0.3}, {rj, rj, rj, rj}, b);
    EXPECT_LE(std::abs(r.value), 1e-10);
    EXPECT_THROW(degiorgi_residual({0.0, 0.1}, {rj, rj}, b), std::invalid_argument);
    EXPECT_THROW(degiorgi_residual({0.0, 0.1, 0.1}, {rj, rj, rj}, b), std::invalid_argument);
}

TEST(Generic, DeGiorgiResidualShrinksWithSnapshotSpacingAndFlagsPerturbations) {
    SimConfig cfg;
    cfg.n = 17;
    cfg.spec = constant_kernel();
    cfg.dt = 5e-4;
    cfg.t_end = 0.032;
    cfg.snapshot_stride = 1;
    const auto b = blocks_for(cfg);
    const auto sim = run_simulation(cfg, b, default_mixture(b.grid));
    ASSERT_EQ(sim.halvings, 0u);
    std::vector<double> res;
    std::vector<double> ts;
    std::vector<Field> tr;
    for (std::size_t every : {16u, 8u}) {
        ts.clear();
        tr.clear();
        for (std::size_t k = 0; k < sim.snapshots.size(); k += every) {
            ts.push_back(sim.series.times[k]);
            tr.push_back(sim.snapshots[k]);
        }
        res.push_back(std::abs(degiorgi_residual(ts, tr, b).value));
    }
    EXPECT_LT(res[1], res[0]);
    for (std::size_t k = 0; k < tr.size(); ++k)
        for (std::size_t a = 0; a < tr[k].size(); ++a)
            tr[k][a] *= 1.0 + 0.05 * std::sin(std::numbers::pi * ts[k] / cfg.t_end) * std::cos(b.grid->node(a)[0]);
    EXPECT_GT(std::abs(degiorgi_residual(ts, tr, b).value), 10.0 * res[1]);
}

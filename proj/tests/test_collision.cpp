#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wkl/collision.hpp"
#include "wkl/generic.hpp"
#include "wkl/limit.hpp"
#include "wkl/sim.hpp"

using namespace wkl;

namespace {

constexpr double kPi = std::numbers::pi;

KernelSpec constant_kernel(int d = 2) {
    KernelSpec s;
    s.angular = base_beta(AngularKind::constant, d);
    return s;
}

double gauss(const Vec& v) { return std::exp(-0.5 * (v[0] * v[0] + v[1] * v[1])); }

// Strong-form four-wave operator at a point for f = exp(-|v|^2 / 2), by direct quadrature over a fine
// v_* lattice and the full circle of sigma. The one-sided angular profile C on [0, pi/2] is
// replaced by its symmetrization C/2 on the whole circle (the integrand is even in sigma).
double q4_reference(const Vec& v, double C) {
    const double hs = 0.04, L = 5.0;
    const int m = static_cast<int>(std::round(2 * L / hs));
    const int ns = 64;
    double total = 0.0;
    for (int i = 0; i <= m; ++i) {
        for (int j = 0; j <= m; ++j) {
            const Vec vs{-L + i * hs, -L + j * hs, 0.0};
            const double r = std::hypot(v[0] - vs[0], v[1] - vs[1]);
            if (r == 0.0) continue;
            const double f = gauss(v), fs = gauss(vs);
            double inner = 0.0;
            for (int k = 0; k < ns; ++k) {
                const double phi = 2 * kPi * (k + 0.5) / ns;
                const Vec s{std::cos(phi), std::sin(phi), 0.0};
                const Vec vp{0.5 * (v[0] + vs[0]) + 0.5 * r * s[0], 0.5 * (v[1] + vs[1]) + 0.5 * r * s[1], 0.0};
                const Vec vps{v[0] + vs[0] - vp[0], v[1] + vs[1] - vp[1], 0.0};
                const double fp = gauss(vp), fps = gauss(vps);
                // f f_* f' f'_* (1/f' + 1/f'_* - 1/f - 1/f_*) without forming large reciprocals
                inner += f * fs * fps + f * fs * fp - fs * fp * fps - f * fp * fps;
            }
            const double wi = (i == 0 || i == m) ? 0.5 : 1.0, wj = (j == 0 || j == m) ? 0.5 : 1.0;
            total += wi * wj * inner * (2 * kPi / ns);
        }
    }
    return -4.0 * kPi * 0.5 * C * total * hs * hs;
}

// Pointwise three-wave operator for f = exp(-|v|^2 / 2): gain over the circle with diameter v,
// loss over the line perpendicular to v.
double q3_reference(const Vec& v) {
    const double sp = std::hypot(v[0], v[1]);
    const Vec k{v[0] / sp, v[1] / sp, 0.0}, e{k[1], -k[0], 0.0};
    const double f = gauss(v);
    const int ns = 1024;
    double gain = 0.0;
    for (int q = 0; q < ns; ++q) {
        const double phi = 2 * kPi * (q + 0.5) / ns;
        const double c = std::cos(phi), s = std::sin(phi);
        const Vec v1{0.5 * v[0] + 0.5 * sp * (c * k[0] + s * e[0]), 0.5 * v[1] + 0.5 * sp * (c * k[1] + s * e[1]), 0};
        const Vec v2{v[0] - v1[0], v[1] - v1[1], 0.0};
        const double f1 = gauss(v1), f2 = gauss(v2);
        // f f1 f2 (1/f1 + 1/f2 - 1/f)
        gain -= f * f2 + f * f1 - f1 * f2;
    }
    gain *= 0.25 * 2 * kPi / ns;
    const double ds = 0.002, T = 8.0;
    double loss = 0.0;
    for (double t = -T + 0.5 * ds; t < T; t += ds) {
        const Vec w{t * e[0], t * e[1], 0.0}, u{v[0] + t * e[0], v[1] + t * e[1], 0.0};
        const double fw = gauss(w), fu = gauss(u);
        // f fw fu (1/f + 1/fw - 1/fu)
        loss -= fw * fu + f * fu - f * fw;
    }
    loss *= ds / (2.0 * sp);
    return kPi * (gain - 2.0 * loss);
}

// Landau flux at a point for f = exp(-|v|^2 / 2): int r^2 (f f_*)^2 Pi (grad f^{-1} - grad f_*^{-1}) dv_*.
Vec landau_flux(const Vec& v) {
    const double hs = 0.05, L = 5.0;
    const int m = static_cast<int>(std::round(2 * L / hs));
    Vec A{0, 0, 0};
    const double f = gauss(v);
    for (int i = 0; i <= m; ++i) {
        for (int j = 0; j <= m; ++j) {
            const Vec vs{-L + i * hs, -L + j * hs, 0.0};
            const Vec r{v[0] - vs[0], v[1] - vs[1], 0.0};
            const double rr = r[0] * r[0] + r[1] * r[1];
            const double fs = gauss(vs);
            // (f f_*)^2 (grad f^{-1} - grad f_*^{-1}) = f f_* (f_* v - f v_*)
            Vec u{f * fs * (fs * v[0] - f * vs[0]), f * fs * (fs * v[1] - f * vs[1]), 0.0};
            const double ru = r[0] * u[0] + r[1] * u[1];
            const double wi = (i == 0 || i == m) ? 0.5 : 1.0, wj = (j == 0 || j == m) ? 0.5 : 1.0;
            A[0] += wi * wj * (rr * u[0] - ru * r[0]);
            A[1] += wi * wj * (rr * u[1] - ru * r[1]);
        }
    }
    A[0] *= hs * hs;
    A[1] *= hs * hs;
    return A;
}

double landau_reference(const Vec& v) {
    const double h = 1e-3;
    double div = 0.0;
    for (int c = 0; c < 2; ++c) {
        auto comp = [&](double s) {
            Vec p = v;
            p[c] += s;
            return landau_flux(p)[c];
        };
        div += (comp(-2 * h) - 8 * comp(-h) + 8 * comp(h) - comp(2 * h)) / (12 * h);
    }
    return -4.0 * kPi * div;
}

std::vector<std::size_t> probe_nodes(const GridPtr& g) {
    // Nodes shared by every grid with n - 1 a multiple of 16 on [-5, 5]^2.
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < g->count; ++a) {
        const Vec v = g->node(a);
        const double s = std::hypot(v[0], v[1]);
        const auto idx = g->multi(a);
        const int stride = (g->n - 1) / 16;
        if (idx[0] % stride == 0 && idx[1] % stride == 0 && s >= 0.5 && s <= 2.0 && v[1] >= 0.0) out.push_back(a);
    }
    return out;
}

double probe_error(const Field& q, const std::vector<std::size_t>& nodes, const std::vector<double>& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        num += (q[nodes[i]] - ref[i]) * (q[nodes[i]] - ref[i]);
        den += ref[i] * ref[i];
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST(Quartet, ResonanceConditionsHold) {
    const Vec v{0.3, -1.2, 0.5}, vs{-0.7, 0.4, 1.1};
    const double s = 1.0 / std::sqrt(3.0);
    const auto q = make_quartet(v, vs, Vec{s, -s, s}, 3);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(q.v[k] + q.v_star[k], q.v_prime[k] + q.v_prime_star[k], 1e-14);
    EXPECT_NEAR(dot(v, v, 3) + dot(vs, vs, 3),
                dot(q.v_prime, q.v_prime, 3) + dot(q.v_prime_star, q.v_prime_star, 3), 1e-13);
    EXPECT_THROW(make_quartet(v, v, Vec{1, 0, 0}, 3), std::invalid_argument);
}

TEST(Quartet, RayleighJeansIsStationary) {
    auto g = build_velocity_grid(2, 17, 5.0);
    const Field f = rayleigh_jeans(g, 1.0, 1.0);
    const auto out = q4_apply(f, constant_kernel(), sphere_rule(1, 16));
    EXPECT_LE(norm_inf(out.q), 1e-12 * norm_inf(f));
    EXPECT_LE(std::abs(out.dissipation), 1e-12);
}

TEST(Quartet, ConservesMassMomentumEnergyExactly) {
    for (int gamma2 : {0, 1}) {
        auto g = build_velocity_grid(2, 17, 5.0);
        const Field f = default_mixture(g);
        KernelSpec spec = constant_kernel();
        spec.gamma = 0.5 * gamma2;
        const auto out = q4_apply(f, spec, sphere_rule(1, 12));
        const double scale = norm_inf(out.q) * 100.0;
        EXPECT_EQ(out.dropped_mass, 0.0);
        EXPECT_NEAR(integrate(out.q), 0.0, 1e-13 * scale);
        const Field vx = Field::from_function(g, [](const Vec& v) { return v[0]; });
        const Field e = Field::from_function(g, [](const Vec& v) { return v[0] * v[0] + v[1] * v[1]; });
        EXPECT_NEAR(inner(out.q, vx), 0.0, 1e-13 * scale);
        EXPECT_NEAR(inner(out.q, e), 0.0, 1e-12 * scale);
        EXPECT_GT(out.truncated, 0u);
    }
}

TEST(Quartet, DissipationIsEntropyProduction) {
    auto g = build_velocity_grid(2, 17, 5.0);
    const Field f = default_mixture(g);
    const auto out = q4_apply(f, constant_kernel(), sphere_rule(1, 12));
    const double prod = inner(entropy_variable(f, QuartetModel::wave4), out.q);
    EXPECT_GT(out.dissipation, 0.0);
    EXPECT_NEAR(out.dissipation, prod, 1e-10 * out.dissipation);
}

TEST(Quartet, WeakApplyWithEntropyVariableIsTheOperator) {
    auto g = build_velocity_grid(2, 17, 5.0);
    const Field f = default_mixture(g);
    const auto spec = constant_kernel();
    const auto rule = sphere_rule(1, 12);
    QuartetOperator op(g, spec, sigma_nodes(spec, rule, 2), QuartetModel::wave4);
    const auto a = op.apply(f, entropy_variable(f, QuartetModel::wave4));
    const auto b = q4_apply(f, spec, rule);
    EXPECT_EQ(a.q.values(), b.q.values());
}

TEST(Quartet, ConvergesToAnalyticReferenceAtSecondOrder) {
    const auto spec = constant_kernel();
    const double C = spec.angular.C;
    std::vector<double> errs;
    std::vector<double> ref;
    std::vector<Vec> points;
    for (int n : {17, 33}) {
        auto g = build_velocity_grid(2, n, 5.0);
        const Field f = Field::from_function(g, gauss);
        const auto nodes = probe_nodes(g);
        if (ref.empty()) {
            for (auto a : nodes) {
                points.push_back(g->node(a));
                ref.push_back(q4_reference(g->node(a), C));
            }
        }
        ASSERT_EQ(nodes.size(), ref.size());
        errs.push_back(probe_error(q4_apply(f, spec, sphere_rule(1, 32)).q, nodes, ref));
    }
    EXPECT_LT(errs[1], 0.03);
    EXPECT_GE(errs[0] / errs[1], 3.0) << errs[0] << " " << errs[1];
}

TEST(ThreeWave, ConvergesToAnalyticReference) {
    const auto spec = constant_kernel();
    std::vector<double> errs, ref;
    for (int n : {33, 65}) {
        auto g = build_velocity_grid(2, n, 5.0);
        const Field f = Field::from_function(g, gauss);
        const auto nodes = probe_nodes(g);
        if (ref.empty())
            for (auto a : nodes) ref.push_back(q3_reference(g->node(a)));
        errs.push_back(probe_error(q3_apply(f, spec, sphere_rule(1, 64)).q, nodes, ref));
    }
    EXPECT_LT(errs[1], 0.01);
    EXPECT_GE(errs[0] / errs[1], 3.0) << errs[0] << " " << errs[1];
}

TEST(ThreeWave, ConservesMomentumAndEnergyToQuadratureTolerance) {
    const auto spec = constant_kernel();
    std::vector<double> edrift;
    for (int n : {17, 33}) {
        auto g = build_velocity_grid(2, n, 5.0);
        const Field f = Field::from_function(g, gauss);
        const auto out = q3_apply(f, spec, sphere_rule(1, 64));
        const Field e = Field::from_function(g, [](const Vec& v) { return v[0] * v[0] + v[1] * v[1]; });
        const Field vx = Field::from_function(g, [](const Vec& v) { return v[0]; });
        // Symmetric f: momentum production vanishes by symmetry of the node set.
        EXPECT_NEAR(inner(out.q, vx), 0.0, 1e-12);
        edrift.push_back(std::abs(inner(out.q, e)) / (norm_l2(out.q) * norm_l2(e)));
        EXPECT_GT(out.skipped_nodes, 0u);
    }
    EXPECT_LT(edrift[1], edrift[0]);
}

TEST(ThreeWave, WeakFormKillsCollisionInvariantsAndIsSymmetric) {
    auto g = build_velocity_grid(2, 17, 5.0);
    const auto spec = constant_kernel();
    const auto rule = sphere_rule(1, 16);
    const Field f = Field::from_function(g, [](const Vec& v) { return 0.2 + gauss(v); });
    const Field e = Field::from_function(g, [](const Vec& v) { return v[0] * v[0] + v[1] * v[1]; });
    const Field vx = Field::from_function(g, [](const Vec& v) { return v[0] - 0.3 * v[1]; });
    const auto Me = q3_weak_apply(f, e, spec, rule);
    const auto Mv = q3_weak_apply(f, vx, spec, rule);
    const auto M1 = q3_weak_apply(f, Field(g, 1.0), spec, rule);
    EXPECT_LE(norm_inf(Me.q), 1e-12 * norm_inf(M1.q));
    EXPECT_LE(norm_inf(Mv.q), 1e-12 * norm_inf(M1.q));
    EXPECT_GT(norm_inf(M1.q), 0.0);  // mass is not an invariant of three-wave dynamics
    Rng rng(11);
    const Field a = random_smooth_field(g, rng), b = random_smooth_field(g, rng);
    const double ab = inner(q3_weak_apply(f, a, spec, rule).q, b);
    const double ba = inner(q3_weak_apply(f, b, spec, rule).q, a);
    EXPECT_NEAR(ab, ba, 1e-11 * std::abs(ab));
}

TEST(ThreeWave, RayleighJeansWithZeroChemicalPotentialIsStationaryInWeakForm) {
    auto g = build_velocity_grid(2, 16, 5.0);  // even n: no node at the origin
    const Field f = rayleigh_jeans(g, 0.0, 1.0);
    Field gi(g);
    for (std::size_t a = 0; a < f.size(); ++a) gi[a] = 1.0 / f[a];
    const auto out = q3_weak_apply(f, gi, constant_kernel(), sphere_rule(1, 16));
    EXPECT_LE(norm_inf(out.q), 1e-12 * norm_inf(f));
    EXPECT_THROW(rayleigh_jeans(build_velocity_grid(2, 17, 5.0), 0.0, 1.0), std::domain_error);
}

TEST(Boltzmann, MaxwellianIsStationary) {
    auto g = build_velocity_grid(2, 17, 5.0);
    const Field f = Field::from_function(g, [](const Vec& v) { return std::exp(-0.5 * (v[0] * v[0] + v[1] * v[1])); });
    const auto out = q_boltzmann_apply(f, constant_kernel(), sphere_rule(1, 12));
    EXPECT_LE(norm_inf(out.q), 1e-12 * norm_inf(f));
}

TEST(Boltzmann, EntropyProductionNonNegativeOnRandomFields) {
    auto g = build_velocity_grid(2, 13, 4.0);
    const auto spec = constant_kernel();
    QuartetOperator op(g, spec, sigma_nodes(spec, sphere_rule(1, 8), 2), QuartetModel::boltzmann);
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        Field f = random_smooth_field(g, rng);
        for (auto& x : f.values()) x = std::exp(x);
        const auto out = op.apply(f, entropy_variable(f, QuartetModel::boltzmann));
        EXPECT_GE(out.dissipation, -1e-12);
        EXPECT_NEAR(integrate(out.q), 0.0, 1e-12 * (1.0 + norm_inf(out.q)));
    }
}

TEST(Boltzmann, LogarithmicMean) {
    EXPECT_DOUBLE_EQ(log_mean(2.0, 2.0), 2.0);
    EXPECT_NEAR(log_mean(1.0, std::exp(1.0)), std::exp(1.0) - 1.0, 1e-14);
    EXPECT_NEAR(log_mean(3.0, 5.0), log_mean(5.0, 3.0), 1e-14);
    EXPECT_NEAR(log_mean(1.0, 1.0 + 1e-12), 1.0 + 0.5e-12, 1e-15);
    EXPECT_THROW(log_mean(0.0, 1.0), std::domain_error);
}

TEST(Landau, RayleighJeansIsStationaryAndInvariantsConserved) {
    auto g = build_velocity_grid(2, 17, 5.0);
    const auto spec = constant_kernel();
    const Field rj = rayleigh_jeans(g, 1.0, 1.0);
    EXPECT_LE(norm_inf(q_landau_apply(rj, spec).q), 1e-12 * norm_inf(rj) * 10.0);
    const Field f = default_mixture(g);
    const auto out = q_landau_apply(f, spec);
    const double scale = norm_inf(out.q) * 100.0;
    const Field vx = Field::from_function(g, [](const Vec& v) { return v[0]; });
    const Field e = Field::from_function(g, [](const Vec& v) { return v[0] * v[0] + v[1] * v[1]; });
    EXPECT_NEAR(integrate(out.q), 0.0, 1e-13 * scale);
    EXPECT_NEAR(inner(out.q, vx), 0.0, 1e-13 * scale);
    EXPECT_NEAR(inner(out.q, e), 0.0, 1e-12 * scale);
    EXPECT_GT(out.dissipation, 0.0);
}

TEST(Landau, ConvergesToAnalyticReferenceAtSecondOrder) {
    const auto spec = constant_kernel();
    std::vector<double> errs, ref;
    for (int n : {33, 65}) {
        auto g = build_velocity_grid(2, n, 5.0);
        const Field f = Field::from_function(g, gauss);
        const auto nodes = probe_nodes(g);
        if (ref.empty())
            for (auto a : nodes) ref.push_back(landau_reference(g->node(a)));
        errs.push_back(probe_error(q_landau_apply(f, spec).q, nodes, ref));
    }
    EXPECT_LT(errs[1], 0.03);
    EXPECT_GE(errs[0] / errs[1], 3.0) << errs[0] << " " << errs[1];
}

TEST(Landau, ProjectorProperties) {
    const Vec u{0.3, -0.4, 1.2};
    const auto P = projector(u, 3);
    for (int i = 0; i < 3; ++i) {
        double pu = 0.0;
        for (int j = 0; j < 3; ++j) {
            pu += P[3 * i + j] * u[j];
            EXPECT_NEAR(P[3 * i + j], P[3 * j + i], 1e-15);
        }
        EXPECT_NEAR(pu, 0.0, 1e-14);
    }
    EXPECT_THROW(projector(Vec{0, 0, 0}, 3), std::invalid_argument);
}

TEST(Oracle, AgreesWithQuartetOperatorWithinItsOwnResolution) {
    // The mollified lattice oracle has an intrinsic error of several percent at this size;
    // this pins the measured agreement so regressions in either path show up.
    auto g = build_velocity_grid(2, 17, 2.5);
    const auto spec = constant_kernel();
    const Field f = Field::from_function(g, [](const Vec& v) { return std::exp(-(v[0] * v[0] + v[1] * v[1])); });
    const Field q = q4_apply(f, spec, sphere_rule(1, 16)).q;
    const Field o = oracle_q_mollified(f, spec, 0.5, WaveKind::four);
    double num = 0.0, den = 0.0;
    for (std::size_t a = 0; a < f.size(); ++a) {
        num += g->weights[a] * (q[a] - o[a]) * (q[a] - o[a]);
        den += g->weights[a] * o[a] * o[a];
    }
    EXPECT_LT(std::sqrt(num / den), 0.15);
    OracleOptions tight;
    tight.budget = 10.0;
    EXPECT_THROW(oracle_q_mollified(f, spec, 0.5, WaveKind::four, tight), std::runtime_error);
    EXPECT_THROW(oracle_q_mollified(f, spec, 0.0, WaveKind::four), std::invalid_argument);
}

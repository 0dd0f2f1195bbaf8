#include "wkl/generic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace wkl {

namespace {

constexpr double kPi = std::numbers::pi;

// Second-order derivative along one strided line family of a phase array.
// Central inside, one-sided at the ends; periodic when requested.
void line_diff(const std::vector<double>& in, std::vector<double>& out, std::size_t count, int n,
               std::size_t stride, double h, bool periodic) {
    const double c = 0.5 / h;
    for (std::size_t a = 0; a < count; ++a) {
        const int i = static_cast<int>((a / stride) % n);
        if (periodic) {
            const std::size_t up = i == n - 1 ? a - (n - 1) * stride : a + stride;
            const std::size_t dn = i == 0 ? a + (n - 1) * stride : a - stride;
            out[a] = c * (in[up] - in[dn]);
        } else if (i == 0) {
            out[a] = c * (-3.0 * in[a] + 4.0 * in[a + stride] - in[a + 2 * stride]);
        } else if (i == n - 1) {
            out[a] = c * (3.0 * in[a] - 4.0 * in[a - stride] + in[a - 2 * stride]);
        } else {
            out[a] = c * (in[a + stride] - in[a - stride]);
        }
    }
}

void line_diff_transpose(const std::vector<double>& in, std::vector<double>& out, std::size_t count, int n,
                         std::size_t stride, double h) {
    const double c = 0.5 / h;
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t a = 0; a < count; ++a) {
        const int i = static_cast<int>((a / stride) % n);
        const double x = c * in[a];
        if (i == 0) {
            out[a] -= 3.0 * x;
            out[a + stride] += 4.0 * x;
            out[a + 2 * stride] -= x;
        } else if (i == n - 1) {
            out[a] += 3.0 * x;
            out[a - stride] -= 4.0 * x;
            out[a - 2 * stride] += x;
        } else {
            out[a + stride] += x;
            out[a - stride] -= x;
        }
    }
}

struct PhaseOps {
    const PhaseGrid& g;
    std::size_t vstride;
    explicit PhaseOps(const PhaseGrid& grid) : g(grid), vstride(grid.dv == 1 ? 1 : grid.nv) {}

    void Gx(const std::vector<double>& in, std::vector<double>& out) const {
        line_diff(in, out, g.count, g.nx, g.nvel(), g.hx, true);
    }
    void Gv(const std::vector<double>& in, std::vector<double>& out) const {
        line_diff(in, out, g.count, g.nv, vstride, g.hv, false);
    }
    // Weighted adjoints. The x-stencil is skew and the weights do not vary along x.
    void Gx_adj(const std::vector<double>& in, std::vector<double>& out) const {
        Gx(in, out);
        for (auto& x : out) x = -x;
    }
    void Gv_adj(const std::vector<double>& in, std::vector<double>& out) const {
        std::vector<double> wu(g.count);
        for (std::size_t a = 0; a < g.count; ++a) wu[a] = g.weights[a] * in[a];
        line_diff_transpose(wu, out, g.count, g.nv, vstride, g.hv);
        for (std::size_t a = 0; a < g.count; ++a) out[a] /= g.weights[a];
    }
};

double speed_sq(const Vec& v, int d) { return dot(v, v, d); }

}  // namespace

Model parse_model(const std::string& name) {
    if (name == "wave3") return Model::wave3;
    if (name == "wave4") return Model::wave4;
    if (name == "boltzmann") return Model::boltzmann;
    if (name == "landau" || name == "landau-limit") return Model::landau;
    throw std::invalid_argument("unknown model '" + name + "'");
}

std::string to_string(Model m) {
    switch (m) {
        case Model::wave3: return "wave3";
        case Model::wave4: return "wave4";
        case Model::boltzmann: return "boltzmann";
        case Model::landau: return "landau-limit";
    }
    return "unknown";
}

double PhaseGrid::x(std::size_t a) const { return hx * static_cast<double>(a / nvel()); }

double PhaseGrid::v(std::size_t a, int comp) const {
    std::size_t iv = a % nvel();
    int i = dv == 1 ? static_cast<int>(iv) : (comp == 0 ? static_cast<int>(iv / nv) : static_cast<int>(iv % nv));
    if (dv == 1 && comp != 0) return 0.0;
    return -vmax + hv * i;
}

PhaseGridPtr build_phase_grid(int nx, double Lx, int dv, int nv, double vmax) {
    if (nx < 4 || nv < 4) throw std::invalid_argument("phase grid needs at least 4 nodes per axis");
    if (dv != 1 && dv != 2) throw std::invalid_argument("phase grid velocity dimension must be 1 or 2");
    if (!(Lx > 0.0 && vmax > 0.0)) throw std::invalid_argument("phase grid extents must be positive");
    auto g = std::make_shared<PhaseGrid>();
    g->nx = nx;
    g->dv = dv;
    g->nv = nv;
    g->Lx = Lx;
    g->vmax = vmax;
    g->hx = Lx / nx;
    g->hv = 2.0 * vmax / (nv - 1);
    g->count = nx * g->nvel();
    g->weights.resize(g->count);
    for (std::size_t a = 0; a < g->count; ++a) {
        const std::size_t iv = a % g->nvel();
        double w = g->hx;
        const int i1 = dv == 1 ? static_cast<int>(iv) : static_cast<int>(iv / nv);
        w *= (i1 == 0 || i1 == nv - 1) ? 0.5 * g->hv : g->hv;
        if (dv == 2) {
            const int i2 = static_cast<int>(iv % nv);
            w *= (i2 == 0 || i2 == nv - 1) ? 0.5 * g->hv : g->hv;
        }
        g->weights[a] = w;
    }
    return g;
}

double phase_inner(const PhaseField& a, const PhaseField& b) {
    if (a.grid != b.grid) throw std::invalid_argument("phase fields live on different grids");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += a.grid->weights[i] * a.values[i] * b.values[i];
    return s;
}

double phase_norm(const PhaseField& a) { return std::sqrt(phase_inner(a, a)); }

PhaseField apply_L(const PhaseField& f, const PhaseField& g) {
    if (!f.grid || f.grid != g.grid) throw std::invalid_argument("apply_L: fields must share a phase grid");
    const auto& grid = *f.grid;
    if (f.values.size() != grid.count || g.values.size() != grid.count)
        throw std::invalid_argument("apply_L: field length does not match grid");
    PhaseOps ops(grid);
    std::vector<double> gx(grid.count), gv(grid.count), t1(grid.count), t2(grid.count);
    ops.Gx(g.values, gx);
    ops.Gv(g.values, gv);
    for (std::size_t a = 0; a < grid.count; ++a) {
        gv[a] *= f.values[a];
        gx[a] *= f.values[a];
    }
    ops.Gx_adj(gv, t1);
    ops.Gv_adj(gx, t2);
    PhaseField out{f.grid, std::vector<double>(grid.count)};
    for (std::size_t a = 0; a < grid.count; ++a) out.values[a] = t1[a] - t2[a];
    return out;
}

Field BuildingBlocks::dE() const {
    const int d = grid->d;
    return Field::from_function(grid, [d](const Vec& v) { return 0.5 * speed_sq(v, d); });
}

Field BuildingBlocks::dE_omega() const {
    const int d = grid->d;
    return Field::from_function(grid, [d](const Vec& v) { return speed_sq(v, d); });
}

Field BuildingBlocks::dS(const Field& f) const {
    return entropy_variable(f, model == Model::boltzmann ? QuartetModel::boltzmann : QuartetModel::wave4);
}

double BuildingBlocks::entropy(const Field& f) const {
    const auto fn = eval_functionals(f);
    return model == Model::boltzmann ? -fn.entropy_B : fn.entropy_H;
}

CollisionOutput BuildingBlocks::collision(const Field& f) const { return apply_M(*this, f, dS(f)); }

Field BuildingBlocks::diagonal(const Field& f) const {
    if (!quartet) throw std::logic_error("diagonal only available for quartet models");
    return quartet->diagonal(f);
}

BuildingBlocks make_blocks(Model model, GridPtr grid, const KernelSpec& spec, const SphereRule& rule,
                           PhaseGridPtr phase) {
    BuildingBlocks b;
    b.model = model;
    b.grid = grid;
    b.spec = spec;
    b.rule = rule;
    b.phase = phase ? phase : build_phase_grid(32, 2.0 * kPi, 1, 32, 5.0);
    if (model == Model::wave4 || model == Model::boltzmann) {
        if (rule.dim != grid->d - 1) throw std::invalid_argument("sphere rule dimension does not match the grid");
        b.quartet = std::make_shared<QuartetOperator>(
            grid, spec, sigma_nodes(spec, rule, grid->d),
            model == Model::wave4 ? QuartetModel::wave4 : QuartetModel::boltzmann);
    }
    if (model == Model::wave3 && rule.dim != grid->d - 1)
        throw std::invalid_argument("sphere rule dimension does not match the grid");
    return b;
}

CollisionOutput apply_M(const BuildingBlocks& blocks, const Field& f, const Field& g) {
    if (f.grid().d != blocks.grid->d || f.grid().n != blocks.grid->n)
        throw std::invalid_argument("apply_M: field grid does not match the building blocks");
    switch (blocks.model) {
        case Model::wave4:
        case Model::boltzmann: return blocks.quartet->apply(f, g);
        case Model::wave3: return q3_weak_apply(f, g, blocks.spec, blocks.rule);
        case Model::landau: return landau_apply_M(f, g, blocks.spec);
    }
    throw std::logic_error("unhandled model");
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Field random_smooth_field(const GridPtr& grid, Rng& rng, int modes) {
    const int d = grid->d;
    std::vector<Vec> k(modes);
    std::vector<double> amp(modes), phase(modes);
    for (int m = 0; m < modes; ++m) {
        for (int c = 0; c < d; ++c) k[m][c] = (2.0 * uniform01(rng) - 1.0) * 3.0 / grid->vmax;
        amp[m] = 2.0 * uniform01(rng) - 1.0;
        phase[m] = 2.0 * kPi * uniform01(rng);
    }
    return Field::from_function(grid, [&](const Vec& v) {
        double s = 0.0;
        for (int m = 0; m < modes; ++m) s += amp[m] * std::cos(dot(k[m], v, d) + phase[m]);
        return s;
    });
}

PhaseField random_smooth_phase_field(const PhaseGridPtr& grid, Rng& rng, int modes) {
    PhaseField out{grid, std::vector<double>(grid->count, 0.0)};
    for (int m = 0; m < modes; ++m) {
        const double kx = 2.0 * kPi / grid->Lx * (1 + static_cast<int>(3.0 * uniform01(rng)));
        const double k1 = (2.0 * uniform01(rng) - 1.0) * 3.0 / grid->vmax;
        const double k2 = (2.0 * uniform01(rng) - 1.0) * 3.0 / grid->vmax;
        const double amp = 2.0 * uniform01(rng) - 1.0;
        const double ph = 2.0 * kPi * uniform01(rng);
        for (std::size_t a = 0; a < grid->count; ++a)
            out.values[a] += amp * std::cos(kx * grid->x(a) + k1 * grid->v(a, 0) + k2 * grid->v(a, 1) + ph);
    }
    return out;
}

PhaseField default_phase_density(const PhaseGridPtr& grid) {
    PhaseField f{grid, std::vector<double>(grid->count)};
    for (std::size_t a = 0; a < grid->count; ++a) {
        const double v1 = grid->v(a, 0), v2 = grid->v(a, 1);
        const double m = std::exp(-0.5 * (v1 * v1 + v2 * v2));
        // The x-modulation decays in v so that fluxes vanish at the velocity boundary.
        f.values[a] = m * (1.0 + 0.3 * std::sin(2.0 * kPi * grid->x(a) / grid->Lx) * m);
    }
    return f;
}

double phase_antisymmetry(const PhaseGridPtr& grid, int trials, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        PhaseField f = random_smooth_phase_field(grid, rng);
        for (auto& x : f.values) x = std::exp(0.5 * x);
        const PhaseField g = random_smooth_phase_field(grid, rng);
        const PhaseField h = random_smooth_phase_field(grid, rng);
        const PhaseField Lg = apply_L(f, g), Lh = apply_L(f, h);
        const double num = std::abs(phase_inner(Lg, h) + phase_inner(Lh, g));
        const double den = phase_norm(Lg) * phase_norm(h) + phase_norm(Lh) * phase_norm(g);
        if (den > 0.0) worst = std::max(worst, num / den);
    }
    return worst;
}

double phase_degeneracy_LdS(const PhaseField& f) {
    PhaseField dS{f.grid, f.values}, dE{f.grid, f.values};
    for (std::size_t a = 0; a < f.values.size(); ++a) {
        dS.values[a] = 1.0 / f.values[a];
        const double v1 = f.grid->v(a, 0), v2 = f.grid->v(a, 1);
        dE.values[a] = 0.5 * (v1 * v1 + v2 * v2);
    }
    return phase_norm(apply_L(f, dS)) / phase_norm(apply_L(f, dE));
}

namespace {

// Relative Jacobi defect for one random triple of quadratic functionals.
double jacobi_draw(const PhaseField& f, const PhaseOps& ops, Rng& rng) {
    const auto& grid = *f.grid;
    const std::size_t N = grid.count;

    // K_i g = m_i g + alpha_i A_x g, with A_x a symmetric three-point average in x.
    struct Kernel {
        PhaseField m;
        double alpha;
    };
    std::vector<Kernel> K;
    // Multipliers use the lowest x-mode and gentle v-variation so that a 16-point grid already
    // resolves them. x-independent multipliers are excluded: their brackets nearly vanish and the
    // relative defect is then dominated by roundoff-level cancellation.
    for (int i = 0; i < 3; ++i) {
        PhaseField m{f.grid, std::vector<double>(N, 0.0)};
        for (int mode = 0; mode < 3; ++mode) {
            const double kx = 2.0 * kPi / grid.Lx;
            const double kv = (2.0 * uniform01(rng) - 1.0) * 1.5 / grid.vmax;
            const double amp = 2.0 * uniform01(rng) - 1.0;
            const double ph = 2.0 * kPi * uniform01(rng);
            for (std::size_t a = 0; a < N; ++a) m.values[a] += amp * std::cos(kx * grid.x(a) + kv * grid.v(a, 0) + ph);
        }
        const double alpha = uniform01(rng);
        K.push_back({m, alpha});
    }
    auto applyK = [&](const Kernel& k, const PhaseField& g) {
        PhaseField out{g.grid, std::vector<double>(N)};
        const std::size_t s = grid.nvel();
        for (std::size_t a = 0; a < N; ++a) {
            const std::size_t ix = a / s;
            const std::size_t up = ix == std::size_t(grid.nx - 1) ? a - (grid.nx - 1) * s : a + s;
            const std::size_t dn = ix == 0 ? a + (grid.nx - 1) * s : a - s;
            const double avg = 0.5 * g.values[a] + 0.25 * (g.values[up] + g.values[dn]);
            out.values[a] = k.m.values[a] * g.values[a] + k.alpha * avg;
        }
        return out;
    };
    // Differential of B(f) = <K1 f, L(f) K2 f>.
    auto bracket_grad = [&](const Kernel& k1, const Kernel& k2) {
        const PhaseField a = applyK(k1, f), b = applyK(k2, f);
        const PhaseField Lb = apply_L(f, b), La = apply_L(f, a);
        const PhaseField t1 = applyK(k1, Lb), t2 = applyK(k2, La);
        std::vector<double> ax(N), av(N), bx(N), bv(N);
        ops.Gx(a.values, ax);
        ops.Gv(a.values, av);
        ops.Gx(b.values, bx);
        ops.Gv(b.values, bv);
        PhaseField out{f.grid, std::vector<double>(N)};
        for (std::size_t i = 0; i < N; ++i)
            out.values[i] = t1.values[i] - t2.values[i] + ax[i] * bv[i] - av[i] * bx[i];
        return out;
    };
    double sum = 0.0, scale = 0.0;
    for (int c = 0; c < 3; ++c) {
        const Kernel& k1 = K[c];
        const Kernel& k2 = K[(c + 1) % 3];
        const Kernel& k3 = K[(c + 2) % 3];
        const PhaseField dB = bracket_grad(k1, k2);
        const PhaseField dC = apply_L(f, applyK(k3, f));
        sum += phase_inner(dB, dC);
        // Cauchy-Schwarz bound: stable under refinement, unlike the individual terms.
        scale += phase_norm(dB) * phase_norm(dC);
    }
    return scale > 0.0 ? std::abs(sum) / scale : 0.0;
}

}  // namespace

double jacobi_residual(const PhaseField& f, std::uint64_t seed) {
    // Root mean square over several triples: a single triple can cancel by accident on a
    // coarse grid, which hides the refinement trend.
    constexpr int kDraws = 8;
    PhaseOps ops(*f.grid);
    Rng rng(seed);
    double acc = 0.0;
    for (int i = 0; i < kDraws; ++i) {
        const double r = jacobi_draw(f, ops, rng);
        acc += r * r;
    }
    return std::sqrt(acc / kDraws);
}

StructureReport check_structure(const BuildingBlocks& blocks, const Field& f, int trials, std::uint64_t seed) {
    if (trials < 10) throw std::invalid_argument("check_structure needs at least 10 trials");
    StructureReport rep;
    rep.h_velocity = blocks.grid->h;
    rep.h_phase_x = blocks.phase->hx;
    rep.h_phase_v = blocks.phase->hv;

    Rng rng(seed);
    double sym = 0.0, rayleigh = std::numeric_limits<double>::infinity(), opnorm = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Field g = random_smooth_field(blocks.grid, rng);
        const Field h = random_smooth_field(blocks.grid, rng);
        const Field Mg = apply_M(blocks, f, g).q;
        const Field Mh = apply_M(blocks, f, h).q;
        const double gMg = inner(g, Mg), hMh = inner(h, Mh);
        const double den = std::sqrt(std::max(gMg, 0.0) * std::max(hMh, 0.0));
        const double diff = std::abs(inner(Mg, h) - inner(Mh, g));
        if (den > 0.0) sym = std::max(sym, diff / den);
        else if (diff > 0.0) sym = std::max(sym, 1.0);
        rayleigh = std::min({rayleigh, gMg / inner(g, g), hMh / inner(h, h)});
        opnorm = std::max({opnorm, norm_inf(Mg) / norm_inf(g), norm_inf(Mh) / norm_inf(h)});
    }
    rep.symmetry_residual = sym;
    rep.psd_min_rayleigh = rayleigh;
    const Field dE = blocks.dE();
    rep.degeneracy_MdE = opnorm > 0.0 ? norm_inf(apply_M(blocks, f, dE).q) / (norm_inf(dE) * opnorm) : 0.0;

    rep.antisymmetry_residual = phase_antisymmetry(blocks.phase, trials, seed ^ 0x9e3779b97f4a7c15ULL);
    const PhaseField fp = default_phase_density(blocks.phase);
    rep.degeneracy_LdS = phase_degeneracy_LdS(fp);
    rep.jacobi_residual = jacobi_residual(fp, seed ^ 0x5851f42d4c957f2dULL);
    return rep;
}

Functionals eval_functionals(const Field& f) {
    require_positive(f, "entropy functionals");
    const auto& g = f.grid();
    Functionals out;
    for (std::size_t a = 0; a < f.size(); ++a) {
        const Vec v = g.node(a);
        const double w = g.weights[a] * f[a];
        out.mass += w;
        for (int k = 0; k < g.d; ++k) out.momentum[k] += w * v[k];
        const double s2 = speed_sq(v, g.d);
        out.energy_omega += w * s2;
        out.entropy_H += g.weights[a] * std::log(f[a]);
        out.entropy_B += w * std::log(f[a]);
    }
    out.energy = 0.5 * out.energy_omega;
    return out;
}

Field project_invariants(const Field& y, bool include_constant) {
    const auto grid = y.grid_ptr();
    const int d = grid->d;
    std::vector<Field> basis;
    if (include_constant) basis.push_back(Field(grid, 1.0));
    for (int k = 0; k < d; ++k) basis.push_back(Field::from_function(grid, [k](const Vec& v) { return v[k]; }));
    basis.push_back(Field::from_function(grid, [d](const Vec& v) { return speed_sq(v, d); }));
    // Modified Gram-Schmidt, applied twice for stability.
    std::vector<Field> q;
    for (auto b : basis) {
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& e : q) b = axpy(-inner(b, e), e, b);
        const double nb = norm_l2(b);
        for (auto& x : b.values()) x /= nb;
        q.push_back(std::move(b));
    }
    Field p(grid);
    Field r = y;
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& e : q) {
            const double c = inner(r, e);
            r = axpy(-c, e, r);
            p = axpy(c, e, p);
        }
    }
    return p;
}

InverseNorm inverse_norm_sq(const BuildingBlocks& blocks, const Field& f, const Field& y, const DeGiorgiOptions& opt) {
    InverseNorm res;
    const double ny = norm_l2(y);
    if (ny == 0.0) return res;
    const Field ker = project_invariants(y, blocks.model != Model::wave3);
    res.removed_fraction = norm_l2(ker) / ny;
    const Field b = axpy(-1.0, ker, y);
    const double nb = norm_l2(b);
    if (nb == 0.0) return res;

    Field diag(f.grid_ptr(), 1.0);
    if (blocks.has_diagonal()) diag = blocks.diagonal(f);
    for (auto& x : diag.values()) x = std::max(x, 0.0) + opt.lambda;
    auto op = [&](const Field& x) {
        Field Mx = apply_M(blocks, f, x).q;
        return axpy(opt.lambda, x, Mx);
    };
    auto precond = [&](const Field& r) {
        Field z = r;
        for (std::size_t a = 0; a < z.size(); ++a) z[a] /= diag[a];
        return z;
    };

    Field x(f.grid_ptr());
    Field r = b;
    Field z = precond(r);
    Field p = z;
    double rz = inner(r, z);
    int it = 0;
    double rel = 1.0;
    for (; it < opt.max_iterations; ++it) {
        rel = norm_l2(r) / nb;
        if (rel <= opt.tolerance) break;
        const Field Ap = op(p);
        const double pAp = inner(p, Ap);
        if (!(pAp > 0.0)) break;
        const double alpha = rz / pAp;
        x = axpy(alpha, p, x);
        r = axpy(-alpha, Ap, r);
        z = precond(r);
        const double rz_new = inner(r, z);
        p = axpy(rz_new / rz, p, z);
        rz = rz_new;
    }
    rel = norm_l2(r) / nb;
    res.iterations = it;
    res.relative_residual = rel;
    res.converged = rel <= opt.tolerance;
    res.value = inner(b, x);
    return res;
}

DeGiorgiResult degiorgi_residual(const std::vector<double>& times, const std::vector<Field>& traj,
                                 const BuildingBlocks& blocks, const DeGiorgiOptions& opt) {
    const std::size_t K = traj.size();
    if (K < 3 || times.size() != K) throw std::invalid_argument("De Giorgi residual needs at least 3 timed snapshots");
    for (std::size_t k = 1; k < K; ++k)
        if (!(times[k] > times[k - 1])) throw std::invalid_argument("snapshot times must increase");

    std::vector<double> rate(K), diss(K);
    DeGiorgiResult res;
    for (std::size_t k = 0; k < K; ++k) {
        // Second-order time derivative (three-point formulas on a possibly nonuniform mesh).
        std::size_t i0, i1, i2;
        if (k == 0) i0 = 0, i1 = 1, i2 = 2;
        else if (k == K - 1) i0 = K - 3, i1 = K - 2, i2 = K - 1;
        else i0 = k - 1, i1 = k, i2 = k + 1;
        const double t = times[k], t0 = times[i0], t1 = times[i1], t2 = times[i2];
        const double c0 = (2 * t - t1 - t2) / ((t0 - t1) * (t0 - t2));
        const double c1 = (2 * t - t0 - t2) / ((t1 - t0) * (t1 - t2));
        const double c2 = (2 * t - t0 - t1) / ((t2 - t0) * (t2 - t1));
        Field zdot(traj[k].grid_ptr());
        for (std::size_t a = 0; a < zdot.size(); ++a)
            zdot[a] = c0 * traj[i0][a] + c1 * traj[i1][a] + c2 * traj[i2][a];

        const InverseNorm inv = inverse_norm_sq(blocks, traj[k], zdot, opt);
        rate[k] = inv.value;
        res.removed_fraction = std::max(res.removed_fraction, inv.removed_fraction);
        res.converged = res.converged && inv.converged;
        res.max_relative_residual = std::max(res.max_relative_residual, inv.relative_residual);
        diss[k] = blocks.collision(traj[k]).dissipation;
    }
    for (std::size_t k = 1; k < K; ++k) {
        const double dt = times[k] - times[k - 1];
        res.rate_term += 0.25 * dt * (rate[k] + rate[k - 1]);
        res.dissipation_term += 0.25 * dt * (diss[k] + diss[k - 1]);
    }
    res.entropy_change = blocks.entropy(traj.front()) - blocks.entropy(traj.back());
    res.value = res.entropy_change + res.rate_term + res.dissipation_term;
    return res;
}

}  // namespace wkl

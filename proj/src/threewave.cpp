#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wkl/collision.hpp"

namespace wkl {

namespace {

constexpr double kPi = std::numbers::pi;

// Quadratic-exact interpolation of g from precomputed per-axis second differences.
struct CurvedField {
    const Field& g;
    std::vector<Field> S;
    explicit CurvedField(const Field& x) : g(x) {
        for (int k = 0; k < x.grid().d; ++k) S.push_back(second_difference(x, k));
    }
    double at(const CellStencil& st) const {
        const int d = g.grid().d;
        double s = 0.0;
        for (int c = 0; c < st.count; ++c) {
            double v = g[st.node[c]];
            for (int k = 0; k < d; ++k) v -= 0.5 * st.t[k] * (1.0 - st.t[k]) * S[k][st.node[c]];
            s += st.weight[c] * v;
        }
        return s;
    }
};

double bilinear(const Field& f, const CellStencil& st) {
    double s = 0.0;
    for (int c = 0; c < st.count; ++c) s += st.weight[c] * f[st.node[c]];
    return s;
}

// Surface factor (|v|/2)^{d-1} times frequency factor 1/(2|v|); finite at v=0 in d=2.
double gain_weight(double speed, int d) {
    if (d == 2) return 0.25;
    return 0.125 * speed;
}

Vec to_world(const Vec& s, const Vec& k, const std::array<Vec, 2>& e, int d) {
    Vec w{0, 0, 0};
    for (int a = 0; a < d; ++a) {
        w[a] = s[0] * k[a] + s[1] * e[0][a];
        if (d == 3) w[a] += s[2] * e[1][a];
    }
    return w;
}

double sum_speed_sq(const KernelSpec& spec, const Vec& v, int d) {
    return radial_sq(spec, std::sqrt(dot(v, v, d)));
}

}  // namespace

CollisionOutput q3_apply(const Field& f, const KernelSpec& spec, const SphereRule& rule, const ThreeWaveOptions& opt) {
    require_positive(f, "three-wave operator");
    const auto& grid = f.grid();
    const int d = grid.d;
    if (rule.dim != d - 1) throw std::invalid_argument("three-wave rule must live on S^{d-1}");
    const double v_min = opt.v_min >= 0.0 ? opt.v_min : 0.25 * grid.h;
    const double ds = opt.plane_spacing > 0.0 ? opt.plane_spacing : (d == 2 ? 0.25 : 0.5) * grid.h;
    const double T = grid.vmax * std::sqrt(static_cast<double>(d));
    const int m = static_cast<int>(std::ceil(T / ds));  // plane nodes per direction: 2m

    Field g(f.grid_ptr());
    for (std::size_t a = 0; a < f.size(); ++a) g[a] = 1.0 / f[a];
    CurvedField gc(g);

    CollisionOutput out;
    out.q = Field(f.grid_ptr());
    const double cell = std::pow(ds, d - 1);
    CellStencil s1, s2;
    for (std::size_t a = 0; a < grid.count; ++a) {
        const Vec v = grid.node(a);
        const double speed = std::sqrt(dot(v, v, d));
        if (speed < v_min) {
            ++out.skipped_nodes;
            continue;
        }
        Vec k{0, 0, 0};
        for (int i = 0; i < d; ++i) k[i] = v[i] / speed;
        const auto e = perpendicular_basis(k, d);
        const double fa = f[a], ga = g[a];

        double gain = 0.0, diss = 0.0;
        const double ksum = sum_speed_sq(spec, v, d);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const Vec s = to_world(rule.nodes[q], k, e, d);
            Vec v1{0, 0, 0}, v2{0, 0, 0};
            for (int i = 0; i < d; ++i) {
                v1[i] = 0.5 * v[i] + 0.5 * speed * s[i];
                v2[i] = v[i] - v1[i];
            }
            if (!locate(grid, v1, s1) || !locate(grid, v2, s2)) {
                ++out.truncated;
                continue;
            }
            const double mob = fa * bilinear(f, s1) * bilinear(f, s2);
            const double dg = gc.at(s1) + gc.at(s2) - ga;
            gain -= rule.weights[q] * ksum * mob * dg;
            diss += rule.weights[q] * ksum * mob * dg * dg;
        }
        const double gw = gain_weight(speed, d);
        gain *= gw;
        out.dissipation += kPi * grid.weights[a] * gw * diss;

        double loss = 0.0;
        std::array<int, 2> idx{-m, d == 3 ? -m : 0};
        while (true) {
            Vec w{0, 0, 0};
            const double t0 = (idx[0] + 0.5) * ds;
            const double t1 = (idx[1] + 0.5) * ds;
            for (int i = 0; i < d; ++i) w[i] = t0 * e[0][i] + (d == 3 ? t1 * e[1][i] : 0.0);
            Vec v1{0, 0, 0};
            for (int i = 0; i < d; ++i) v1[i] = v[i] + w[i];
            if (locate(grid, w, s1) && locate(grid, v1, s2)) {
                const double mob = fa * bilinear(f, s1) * bilinear(f, s2);
                // v1 is the sum wave, v and w its parts.
                const double dg = ga + gc.at(s1) - gc.at(s2);
                loss -= sum_speed_sq(spec, v1, d) * mob * dg;
            }
            if (d == 2) {
                if (++idx[0] >= m) break;
            } else {
                if (++idx[1] >= m) {
                    idx[1] = -m;
                    if (++idx[0] >= m) break;
                }
            }
        }
        loss *= cell / (2.0 * speed);
        out.q[a] = kPi * (gain - 2.0 * loss);
        if (!std::isfinite(out.q[a])) throw std::runtime_error("three-wave operator produced a non-finite value");
    }
    out.dropped_mass = 0.0;
    return out;
}

CollisionOutput q3_weak_apply(const Field& f, const Field& g, const KernelSpec& spec, const SphereRule& rule) {
    require_same_grid(f, g);
    require_positive(f, "three-wave operator");
    const auto& grid = f.grid();
    const int d = grid.d;
    if (rule.dim != d - 1) throw std::invalid_argument("three-wave rule must live on S^{d-1}");
    const std::size_t N = grid.count;
    CurvedField gc(g);
    std::vector<double> R(N, 0.0);
    std::vector<std::vector<double>> RS(d, std::vector<double>(N, 0.0));

    auto scatter = [&](const CellStencil& st, double amount) {
        for (int c = 0; c < st.count; ++c) {
            const double x = amount * st.weight[c];
            R[st.node[c]] += x;
            for (int k = 0; k < d; ++k) RS[k][st.node[c]] -= 0.5 * st.t[k] * (1.0 - st.t[k]) * x;
        }
    };

    CollisionOutput out;
    CellStencil s1, s2;
    for (std::size_t a = 0; a < N; ++a) {
        const Vec v = grid.node(a);
        const double speed = std::sqrt(dot(v, v, d));
        const double gw = gain_weight(speed, d);
        if (gw == 0.0) continue;
        Vec k{1.0, 0.0, 0.0};
        if (speed > 0.0)
            for (int i = 0; i < d; ++i) k[i] = v[i] / speed;
        const auto e = perpendicular_basis(k, d);
        const double base = kPi * grid.weights[a] * gw * sum_speed_sq(spec, v, d) * f[a];
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const Vec s = to_world(rule.nodes[q], k, e, d);
            Vec v1{0, 0, 0}, v2{0, 0, 0};
            for (int i = 0; i < d; ++i) {
                v1[i] = 0.5 * v[i] + 0.5 * speed * s[i];
                v2[i] = v[i] - v1[i];
            }
            if (!locate(grid, v1, s1) || !locate(grid, v2, s2)) {
                ++out.truncated;
                continue;
            }
            const double c = base * rule.weights[q] * bilinear(f, s1) * bilinear(f, s2);
            const double dg = gc.at(s1) + gc.at(s2) - g[a];
            const double flux = c * dg;
            out.dissipation += flux * dg;
            R[a] -= flux;
            scatter(s1, flux);
            scatter(s2, flux);
        }
    }
    for (int k = 0; k < d; ++k) second_difference_transpose_add(grid, k, RS[k], R);
    out.q = Field(f.grid_ptr());
    for (std::size_t a = 0; a < N; ++a) out.q[a] = R[a] / grid.weights[a];
    return out;
}

}  // namespace wkl

#include "wkl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/legendre.hpp>

namespace wkl {

std::size_t VelocityGrid::flat(const std::array<int, 3>& idx) const {
    std::size_t a = 0;
    for (int k = 0; k < d; ++k) a = a * n + idx[k];
    return a;
}

std::array<int, 3> VelocityGrid::multi(std::size_t node) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int k = d - 1; k >= 0; --k) {
        idx[k] = static_cast<int>(node % n);
        node /= n;
    }
    return idx;
}

Vec VelocityGrid::node(std::size_t a) const {
    auto idx = multi(a);
    Vec v{0.0, 0.0, 0.0};
    for (int k = 0; k < d; ++k) v[k] = coord(idx[k]);
    return v;
}

std::size_t VelocityGrid::stride(int axis) const {
    std::size_t s = 1;
    for (int k = d - 1; k > axis; --k) s *= n;
    return s;
}

GridPtr build_velocity_grid(int d, int n, double vmax) {
    if (d != 2 && d != 3) throw std::invalid_argument("velocity grid dimension must be 2 or 3");
    if (n < 8) throw std::invalid_argument("velocity grid needs at least 8 nodes per axis");
    if (!(vmax > 0.0)) throw std::invalid_argument("velocity grid half-width must be positive");
    auto g = std::make_shared<VelocityGrid>();
    g->d = d;
    g->n = n;
    g->vmax = vmax;
    g->h = 2.0 * vmax / (n - 1);
    g->count = 1;
    for (int k = 0; k < d; ++k) g->count *= n;
    g->weights.resize(g->count);
    for (std::size_t a = 0; a < g->count; ++a) {
        auto idx = g->multi(a);
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
            bool edge = idx[k] == 0 || idx[k] == n - 1;
            w *= edge ? 0.5 * g->h : g->h;
        }
        g->weights[a] = w;
    }
    return g;
}

Field::Field(GridPtr grid, double fill) : grid_(std::move(grid)) {
    if (!grid_) throw std::invalid_argument("field needs a grid");
    values_.assign(grid_->count, fill);
}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw std::invalid_argument("field needs a grid");
    if (values_.size() != grid_->count) throw std::invalid_argument("field length does not match grid");
}

void require_same_grid(const Field& a, const Field& b) {
    if (a.grid_ptr() != b.grid_ptr() && (a.grid().d != b.grid().d || a.grid().n != b.grid().n ||
                                         a.grid().vmax != b.grid().vmax))
        throw std::invalid_argument("fields live on different grids");
}

void require_positive(const Field& f, const char* what) {
    for (std::size_t a = 0; a < f.size(); ++a) {
        if (!(f[a] > 0.0) || !std::isfinite(f[a]))
            throw std::domain_error(std::string(what) + ": field must be finite and positive (node " +
                                    std::to_string(a) + ")");
    }
}

double integrate(const Field& f) {
    const auto& w = f.grid().weights;
    double s = 0.0;
    for (std::size_t a = 0; a < f.size(); ++a) s += w[a] * f[a];
    return s;
}

double inner(const Field& a, const Field& b) {
    require_same_grid(a, b);
    const auto& w = a.grid().weights;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a[i] * b[i];
    return s;
}

double norm_l2(const Field& f) { return std::sqrt(inner(f, f)); }

double norm_inf(const Field& f) {
    double m = 0.0;
    for (double x : f.values()) m = std::max(m, std::abs(x));
    return m;
}

Field axpy(double a, const Field& x, const Field& y) {
    require_same_grid(x, y);
    Field out = y;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += a * x[i];
    return out;
}

void diff_axis(const VelocityGrid& g, int axis, std::span<const double> in, std::span<double> out) {
    const std::size_t s = g.stride(axis);
    const int n = g.n;
    const double c = 0.5 / g.h;
    for (std::size_t a = 0; a < g.count; ++a) {
        int i = static_cast<int>((a / s) % n);
        if (i == 0)
            out[a] = c * (-3.0 * in[a] + 4.0 * in[a + s] - in[a + 2 * s]);
        else if (i == n - 1)
            out[a] = c * (3.0 * in[a] - 4.0 * in[a - s] + in[a - 2 * s]);
        else
            out[a] = c * (in[a + s] - in[a - s]);
    }
}

void diff_axis_transpose(const VelocityGrid& g, int axis, std::span<const double> in,
                         std::span<double> out) {
    const std::size_t s = g.stride(axis);
    const int n = g.n;
    const double c = 0.5 / g.h;
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t a = 0; a < g.count; ++a) {
        int i = static_cast<int>((a / s) % n);
        const double x = c * in[a];
        if (i == 0) {
            out[a] -= 3.0 * x;
            out[a + s] += 4.0 * x;
            out[a + 2 * s] -= x;
        } else if (i == n - 1) {
            out[a] += 3.0 * x;
            out[a - s] -= 4.0 * x;
            out[a - 2 * s] += x;
        } else {
            out[a + s] += x;
            out[a - s] -= x;
        }
    }
}

std::vector<Field> grad_v(const Field& f) {
    const auto& g = f.grid();
    std::vector<Field> out;
    for (int k = 0; k < g.d; ++k) {
        Field df(f.grid_ptr());
        diff_axis(g, k, f.values(), df.values());
        out.push_back(std::move(df));
    }
    return out;
}

Field div_v(const std::vector<Field>& vfield) {
    if (vfield.empty()) throw std::invalid_argument("div_v of an empty vector field");
    const auto& g = vfield[0].grid();
    if (static_cast<int>(vfield.size()) != g.d) throw std::invalid_argument("div_v: component count");
    Field out(vfield[0].grid_ptr());
    std::vector<double> tmp(g.count);
    for (int k = 0; k < g.d; ++k) {
        diff_axis(g, k, vfield[k].values(), tmp);
        for (std::size_t a = 0; a < g.count; ++a) out[a] += tmp[a];
    }
    return out;
}

bool locate(const VelocityGrid& g, const Vec& p, CellStencil& out) {
    std::array<int, 3> lo{0, 0, 0};
    for (int k = 0; k < g.d; ++k) {
        double s = (p[k] + g.vmax) / g.h;
        if (!(s >= 0.0 && s <= g.n - 1)) return false;
        int c = std::min(static_cast<int>(std::floor(s)), g.n - 2);
        lo[k] = c;
        out.t[k] = s - c;
    }
    out.count = 1 << g.d;
    for (int corner = 0; corner < out.count; ++corner) {
        std::array<int, 3> idx = lo;
        double w = 1.0;
        for (int k = 0; k < g.d; ++k) {
            bool up = (corner >> k) & 1;
            idx[k] += up;
            w *= up ? out.t[k] : 1.0 - out.t[k];
        }
        out.node[corner] = g.flat(idx);
        out.weight[corner] = w;
    }
    return true;
}

double interpolate(const Field& f, const Vec& p) {
    CellStencil st;
    if (!locate(f.grid(), p, st)) return 0.0;
    double s = 0.0;
    for (int c = 0; c < st.count; ++c) s += st.weight[c] * f[st.node[c]];
    return s;
}

double deposit(Field& acc, const Vec& p, double mass) {
    CellStencil st;
    const auto& g = acc.grid();
    if (!locate(g, p, st)) return mass;
    for (int c = 0; c < st.count; ++c) acc[st.node[c]] += mass * st.weight[c] / g.weights[st.node[c]];
    return 0.0;
}

Field second_difference(const Field& f, int axis) {
    const auto& g = f.grid();
    const std::size_t s = g.stride(axis);
    Field out(f.grid_ptr());
    for (std::size_t a = 0; a < g.count; ++a) {
        int i = static_cast<int>((a / s) % g.n);
        int m = std::clamp(i, 1, g.n - 2);
        std::size_t c = a + (m - i) * static_cast<std::ptrdiff_t>(s);
        out[a] = f[c - s] - 2.0 * f[c] + f[c + s];
    }
    return out;
}

void second_difference_transpose_add(const VelocityGrid& g, int axis, std::span<const double> in,
                                     std::span<double> out) {
    const std::size_t s = g.stride(axis);
    for (std::size_t a = 0; a < g.count; ++a) {
        int i = static_cast<int>((a / s) % g.n);
        int m = std::clamp(i, 1, g.n - 2);
        std::size_t c = a + (m - i) * static_cast<std::ptrdiff_t>(s);
        out[c - s] += in[a];
        out[c] -= 2.0 * in[a];
        out[c + s] += in[a];
    }
}

double interpolate_quadratic(const Field& f, const std::vector<Field>& second_diffs, const Vec& p) {
    const auto& g = f.grid();
    CellStencil st;
    if (!locate(g, p, st)) return 0.0;
    double s = 0.0;
    for (int c = 0; c < st.count; ++c) {
        double v = f[st.node[c]];
        for (int k = 0; k < g.d; ++k)
            v -= 0.5 * st.t[k] * (1.0 - st.t[k]) * second_diffs[k][st.node[c]];
        s += st.weight[c] * v;
    }
    return s;
}

double sphere_area(int dim) {
    switch (dim) {
        case 0: return 2.0;
        case 1: return 2.0 * std::numbers::pi;
        case 2: return 4.0 * std::numbers::pi;
        default: throw std::invalid_argument("sphere dimension must be 0, 1 or 2");
    }
}

void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
    if (n < 1) throw std::invalid_argument("Gauss-Legendre needs at least one node");
    auto zeros = boost::math::legendre_p_zeros<double>(n);  // nonnegative roots, ascending
    std::vector<double> t, wt;
    for (auto it = zeros.rbegin(); it != zeros.rend(); ++it) {
        if (*it == 0.0) continue;
        t.push_back(-*it);
    }
    for (double z : zeros) t.push_back(z);
    for (double z : t) {
        double dp = boost::math::legendre_p_prime(n, z);
        wt.push_back(2.0 / ((1.0 - z * z) * dp * dp));
    }
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    x.resize(t.size());
    w.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        x[i] = mid + half * t[i];
        w[i] = half * wt[i];
    }
}

SphereRule sphere_rule(int dim, int n) {
    SphereRule r;
    r.dim = dim;
    const double pi = std::numbers::pi;
    if (dim == 0) {
        r.nodes = {Vec{1.0, 0.0, 0.0}, Vec{-1.0, 0.0, 0.0}};
        r.weights = {1.0, 1.0};
        return r;
    }
    if (dim != 1 && dim != 2) throw std::invalid_argument("sphere dimension must be 0, 1 or 2");
    if (n < 4) throw std::invalid_argument("sphere rule needs at least 4 nodes per direction");
    if (dim == 1) {
        // Half-step offset keeps the poles +-axis0 out of the node set.
        for (int m = 0; m < n; ++m) {
            double phi = 2.0 * pi * (m + 0.5) / n;
            r.nodes.push_back(Vec{std::cos(phi), std::sin(phi), 0.0});
            r.weights.push_back(2.0 * pi / n);
        }
        return r;
    }
    std::vector<double> u, wu;
    gauss_legendre(n, -1.0, 1.0, u, wu);
    for (int i = 0; i < n; ++i) {
        double s = std::sqrt(std::max(0.0, 1.0 - u[i] * u[i]));
        for (int m = 0; m < n; ++m) {
            double phi = 2.0 * pi * (m + 0.5) / n;
            r.nodes.push_back(Vec{u[i], s * std::cos(phi), s * std::sin(phi)});
            r.weights.push_back(wu[i] * 2.0 * pi / n);
        }
    }
    return r;
}

std::array<Vec, 2> perpendicular_basis(const Vec& k, int d) {
    std::array<Vec, 2> e{};
    if (d == 2) {
        e[0] = Vec{k[1], -k[0], 0.0};
        return e;
    }
    int axis = 0;
    for (int a = 1; a < 3; ++a)
        if (std::abs(k[a]) < std::abs(k[axis])) axis = a;
    Vec t{0.0, 0.0, 0.0};
    t[axis] = 1.0;
    double kt = k[axis];
    for (int a = 0; a < 3; ++a) t[a] -= kt * k[a];
    double nt = std::sqrt(dot(t, t, 3));
    for (int a = 0; a < 3; ++a) t[a] /= nt;
    e[0] = t;
    e[1] = Vec{k[1] * t[2] - k[2] * t[1], k[2] * t[0] - k[0] * t[2], k[0] * t[1] - k[1] * t[0]};
    return e;
}

SphereRule rotate_rule_to_plane(const SphereRule& rule, const Vec& k) {
    if (rule.dim != 0 && rule.dim != 1)
        throw std::invalid_argument("plane rule must have sphere dimension 0 or 1");
    const int d = rule.dim + 2;
    double nk = std::sqrt(dot(k, k, d));
    if (std::abs(nk - 1.0) > 1e-12) throw std::invalid_argument("rotate_rule_to_plane needs a unit vector");
    auto e = perpendicular_basis(k, d);
    SphereRule out;
    out.dim = rule.dim;
    out.weights = rule.weights;
    for (const auto& s : rule.nodes) {
        Vec p{0.0, 0.0, 0.0};
        for (int a = 0; a < 3; ++a) p[a] = s[0] * e[0][a] + (rule.dim == 1 ? s[1] * e[1][a] : 0.0);
        out.nodes.push_back(p);
    }
    return out;
}

}  // namespace wkl

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wkl/collision.hpp"
#include "wkl/parallel.hpp"

namespace wkl {

namespace {

constexpr double kPi = std::numbers::pi;

// One off-grid point of a quartet resolved against the grid: cell corners, multilinear
// weights and the per-axis curvature factors of the quadratic-exact interpolant.
template <int D>
struct Point {
    static constexpr int kCorners = 1 << D;
    std::array<std::size_t, kCorners> node;
    std::array<double, kCorners> lam;
    std::array<double, D> tau;
};

template <int D>
inline bool resolve(int n, const std::array<std::size_t, 3>& stride, const std::array<int, 3>& base,
                    const std::array<int, 3>& off, const std::array<double, 3>& t, Point<D>& p) {
    std::array<int, D> lo;
    std::array<double, D> tt;
    for (int k = 0; k < D; ++k) {
        lo[k] = base[k] + off[k];
        tt[k] = t[k];
        if (lo[k] < 0) return false;
        if (lo[k] >= n - 1) {
            if (lo[k] == n - 1 && tt[k] == 0.0) {
                lo[k] = n - 2;
                tt[k] = 1.0;
            } else {
                return false;
            }
        }
    }
    std::size_t origin = 0;
    for (int k = 0; k < D; ++k) {
        origin += lo[k] * stride[k];
        p.tau[k] = -0.5 * tt[k] * (1.0 - tt[k]);
    }
    for (int c = 0; c < Point<D>::kCorners; ++c) {
        std::size_t a = origin;
        double w = 1.0;
        for (int k = 0; k < D; ++k) {
            const bool up = (c >> k) & 1;
            a += up ? stride[k] : 0;
            w *= up ? tt[k] : 1.0 - tt[k];
        }
        p.node[c] = a;
        p.lam[c] = w;
    }
    return true;
}

template <int D>
inline double bilinear(const Point<D>& p, const double* data, int K, int ch) {
    double s = 0.0;
    for (int c = 0; c < Point<D>::kCorners; ++c) s += p.lam[c] * data[p.node[c] * K + ch];
    return s;
}

template <int D>
inline double corrected(const Point<D>& p, const double* data, int K, int ch, int sch) {
    double s = 0.0;
    for (int c = 0; c < Point<D>::kCorners; ++c) {
        const double* x = data + p.node[c] * K;
        double v = x[ch];
        for (int k = 0; k < D; ++k) v += p.tau[k] * x[sch + k];
        s += p.lam[c] * v;
    }
    return s;
}

template <int D>
inline void scatter(const Point<D>& p, double* acc, double amount) {
    for (int c = 0; c < Point<D>::kCorners; ++c) {
        double* r = acc + p.node[c] * (D + 1);
        const double x = amount * p.lam[c];
        r[0] += x;
        for (int k = 0; k < D; ++k) r[1 + k] += x * p.tau[k];
    }
}

struct SweepTotals {
    double dissipation = 0.0;
    std::size_t truncated = 0;
};

// Channel layout of the per-node data. Wave4: f, g, S_k g. Boltzmann: log f, g, S_k log f, S_k g.
template <int D>
struct Layout {
    int K;
    int g_second;
    int logf_second;
};

template <int D>
Layout<D> layout(QuartetModel m) {
    if (m == QuartetModel::wave4) return {2 + D, 2, -1};
    return {2 + 2 * D, 2 + D, 2};
}

template <int D, QuartetModel Model, bool Diagonal>
void sweep(const VelocityGrid& g, const std::vector<QuartetOperator::PairOffset>& offsets,
           const std::vector<QuartetOperator::Entry>& entries, std::size_t begin, std::size_t end,
           const double* data, double* acc, SweepTotals& tot) {
    constexpr Layout<D> L = Model == QuartetModel::wave4 ? Layout<D>{2 + D, 2, -1} : Layout<D>{2 + 2 * D, 2 + D, 2};
    const int K = L.K;
    const int n = g.n;
    std::array<std::size_t, 3> stride{0, 0, 0};
    for (int k = 0; k < D; ++k) stride[k] = g.stride(k);
    const double* W = g.weights.data();
    Point<D> p1, p2;

    for (std::size_t o = begin; o < end; ++o) {
        const auto& po = offsets[o];
        std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
        std::ptrdiff_t jump = 0;
        for (int k = 0; k < D; ++k) {
            lo[k] = std::max(0, -po.delta[k]);
            hi[k] = std::min(n - 1, n - 1 - po.delta[k]);
            jump += static_cast<std::ptrdiff_t>(po.delta[k]) * static_cast<std::ptrdiff_t>(stride[k]);
        }
        const auto* e0 = entries.data() + po.first_entry;
        const auto* e1 = e0 + po.entry_count;

        std::array<int, 3> I = lo;
        while (true) {
            std::size_t i = 0;
            for (int k = 0; k < D; ++k) i += I[k] * stride[k];
            const std::size_t j = i + jump;
            const double* xi = data + i * K;
            const double* xj = data + j * K;
            const double wij = W[i] * W[j];
            double fij;
            if constexpr (Model == QuartetModel::wave4)
                fij = xi[0] * xj[0];
            else
                fij = std::exp(xi[0] + xj[0]);
            const double gij = xi[1] + xj[1];

            for (const auto* e = e0; e != e1; ++e) {
                if (!resolve<D>(n, stride, I, e->off1, e->t1, p1) || !resolve<D>(n, stride, I, e->off2, e->t2, p2)) {
                    ++tot.truncated;
                    continue;
                }
                double mob;
                if constexpr (Model == QuartetModel::wave4) {
                    mob = fij * bilinear<D>(p1, data, K, 0) * bilinear<D>(p2, data, K, 0);
                } else {
                    const double x = corrected<D>(p1, data, K, 0, L.logf_second) +
                                     corrected<D>(p2, data, K, 0, L.logf_second) - xi[0] - xj[0];
                    mob = x == 0.0 ? fij : fij * std::expm1(x) / x;
                }
                const double c = e->coef * wij * mob;
                if constexpr (Diagonal) {
                    acc[i * (D + 1)] += c;
                    acc[j * (D + 1)] += c;
                    for (int q = 0; q < Point<D>::kCorners; ++q) {
                        acc[p1.node[q] * (D + 1)] += c * p1.lam[q] * p1.lam[q];
                        acc[p2.node[q] * (D + 1)] += c * p2.lam[q] * p2.lam[q];
                    }
                } else {
                    const double dg = corrected<D>(p1, data, K, 1, L.g_second) +
                                      corrected<D>(p2, data, K, 1, L.g_second) - gij;
                    const double flux = c * dg;
                    tot.dissipation += flux * dg;
                    acc[i * (D + 1)] -= flux;
                    acc[j * (D + 1)] -= flux;
                    scatter<D>(p1, acc, flux);
                    scatter<D>(p2, acc, flux);
                }
            }

            int k = D - 1;
            while (k >= 0 && I[k] == hi[k]) {
                I[k] = lo[k];
                --k;
            }
            if (k < 0) break;
            ++I[k];
        }
    }
}

template <int D>
std::vector<double> pack(const Field& f, const Field& g, QuartetModel model) {
    const auto L = layout<D>(model);
    const std::size_t N = f.size();
    std::vector<double> data(N * L.K);
    Field first = f;
    if (model == QuartetModel::boltzmann)
        for (auto& x : first.values()) x = std::log(x);
    for (std::size_t a = 0; a < N; ++a) {
        data[a * L.K] = first[a];
        data[a * L.K + 1] = g[a];
    }
    for (int k = 0; k < D; ++k) {
        Field sg = second_difference(g, k);
        for (std::size_t a = 0; a < N; ++a) data[a * L.K + L.g_second + k] = sg[a];
        if (L.logf_second >= 0) {
            Field sl = second_difference(first, k);
            for (std::size_t a = 0; a < N; ++a) data[a * L.K + L.logf_second + k] = sl[a];
        }
    }
    return data;
}

template <int D>
void run_sweep(QuartetModel model, bool diagonal, const VelocityGrid& g,
               const std::vector<QuartetOperator::PairOffset>& offsets,
               const std::vector<QuartetOperator::Entry>& entries, std::size_t begin, std::size_t end,
               const double* data, double* acc, SweepTotals& tot) {
    if (model == QuartetModel::wave4) {
        if (diagonal)
            sweep<D, QuartetModel::wave4, true>(g, offsets, entries, begin, end, data, acc, tot);
        else
            sweep<D, QuartetModel::wave4, false>(g, offsets, entries, begin, end, data, acc, tot);
    } else {
        if (diagonal)
            sweep<D, QuartetModel::boltzmann, true>(g, offsets, entries, begin, end, data, acc, tot);
        else
            sweep<D, QuartetModel::boltzmann, false>(g, offsets, entries, begin, end, data, acc, tot);
    }
}

}  // namespace

ResonantQuartet make_quartet(const Vec& v, const Vec& v_star, const Vec& sigma, int d) {
    ResonantQuartet q;
    q.v = v;
    q.v_star = v_star;
    Vec diff{0, 0, 0};
    for (int k = 0; k < d; ++k) diff[k] = v[k] - v_star[k];
    const double r = std::sqrt(dot(diff, diff, d));
    if (!(r > 0.0)) throw std::invalid_argument("degenerate quartet: v equals v_*");
    q.v_prime = q.v_prime_star = Vec{0, 0, 0};
    double kc = 0.0;
    for (int k = 0; k < d; ++k) {
        const double mid = 0.5 * (v[k] + v_star[k]);
        q.v_prime[k] = mid + 0.5 * r * sigma[k];
        q.v_prime_star[k] = mid - 0.5 * r * sigma[k];
        kc += diff[k] / r * sigma[k];
    }
    q.theta = std::acos(std::clamp(kc, -1.0, 1.0));
    return q;
}

std::vector<AngularNode> sigma_nodes(const KernelSpec& spec, const SphereRule& rule, int d) {
    if (rule.dim != d - 1) throw std::invalid_argument("sigma rule must live on S^{d-1}");
    std::vector<AngularNode> out;
    for (std::size_t m = 0; m < rule.nodes.size(); ++m) {
        const auto& s = rule.nodes[m];
        const double theta = std::acos(std::clamp(s[0], -1.0, 1.0));
        const double w = rule.weights[m] * angular_sq(spec, theta, d);
        if (w == 0.0) continue;
        out.push_back({s[0], {s[1], d == 3 ? s[2] : 0.0}, w});
    }
    return out;
}

std::vector<AngularNode> theta_p_nodes(const KernelSpec& spec, const std::vector<double>& thetas,
                                       const std::vector<double>& theta_weights, const SphereRule& p_rule,
                                       int d) {
    if (p_rule.dim != d - 2) throw std::invalid_argument("p rule must live on S^{d-2}");
    std::vector<AngularNode> out;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        const double th = thetas[i];
        const double beta = spec.epsilon ? scaled_beta(spec.angular, *spec.epsilon, th) : spec.angular(th);
        if (beta == 0.0) continue;
        const double c = std::cos(th), s = std::sin(th);
        for (std::size_t m = 0; m < p_rule.nodes.size(); ++m) {
            const auto& p = p_rule.nodes[m];
            out.push_back({c, {s * p[0], d == 3 ? s * p[1] : 0.0}, theta_weights[i] * p_rule.weights[m] * beta});
        }
    }
    return out;
}

void matched_theta_rule(const SphereRule& sigma_rule, int d, std::vector<double>& thetas,
                        std::vector<double>& weights) {
    thetas.clear();
    weights.clear();
    if (d == 2) {
        if (sigma_rule.dim != 1) throw std::invalid_argument("matched theta rule: expected a circle rule");
        for (std::size_t m = 0; m < sigma_rule.nodes.size(); ++m) {
            const auto& s = sigma_rule.nodes[m];
            if (s[1] <= 0.0) continue;
            thetas.push_back(std::acos(std::clamp(s[0], -1.0, 1.0)));
            weights.push_back(sigma_rule.weights[m]);
        }
        return;
    }
    if (sigma_rule.dim != 2) throw std::invalid_argument("matched theta rule: expected a sphere rule");
    // Product rule: the first n_phi nodes share one polar value, and so on.
    std::size_t i = 0;
    while (i < sigma_rule.nodes.size()) {
        const double u = sigma_rule.nodes[i][0];
        double wsum = 0.0;
        std::size_t j = i;
        while (j < sigma_rule.nodes.size() && sigma_rule.nodes[j][0] == u) wsum += sigma_rule.weights[j++];
        const double th = std::acos(std::clamp(u, -1.0, 1.0));
        // sigma weight = w_u * w_phi with w_phi = 2 pi / n_phi, and d sigma = sin(theta) d theta d phi
        const double wu = wsum / (2.0 * kPi);
        thetas.push_back(th);
        weights.push_back(wu / std::sin(th));
        i = j;
    }
}

QuartetOperator::QuartetOperator(GridPtr grid, const KernelSpec& spec, std::vector<AngularNode> nodes,
                                 QuartetModel model)
    : grid_(std::move(grid)), model_(model) {
    const auto& g = *grid_;
    const int d = g.d, n = g.n;
    // Unordered pairs carry a factor 2.
    const double pref = 2.0 * (model == QuartetModel::wave4 ? kPi : 0.25);
    std::array<int, 3> delta{0, 0, 0};
    const int span = 2 * n - 1;
    std::size_t total = 1;
    for (int k = 0; k < d; ++k) total *= span;
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (int k = d - 1; k >= 0; --k) {
            delta[k] = static_cast<int>(c % span) - (n - 1);
            c /= span;
        }
        // Keep one representative of each unordered pair: first nonzero component positive.
        int lead = 0;
        for (int k = 0; k < d && lead == 0; ++k) lead = delta[k];
        if (lead <= 0) continue;

        Vec dv{0, 0, 0};
        double r2 = 0.0;
        for (int k = 0; k < d; ++k) {
            dv[k] = delta[k];
            r2 += dv[k] * dv[k];
        }
        const double r = std::sqrt(r2);
        Vec kv{0, 0, 0};
        for (int k = 0; k < d; ++k) kv[k] = dv[k] / r;
        const auto e = perpendicular_basis(kv, d);
        const double radial = radial_sq(spec, r * g.h);

        PairOffset po;
        po.delta = delta;
        po.first_entry = entries_.size();
        for (const auto& node : nodes) {
            Entry en;
            for (int k = 0; k < d; ++k) {
                double s = node.cos_theta * kv[k] + node.perp[0] * e[0][k];
                if (d == 3) s += node.perp[1] * e[1][k];
                // Lattice displacement of v' and v'_* from v_*, in cell units.
                const double a = 0.5 * dv[k] + 0.5 * r * s;
                const double b = 0.5 * dv[k] - 0.5 * r * s;
                const double fa = std::floor(a), fb = std::floor(b);
                en.off1[k] = static_cast<int>(fa);
                en.t1[k] = a - fa;
                en.off2[k] = static_cast<int>(fb);
                en.t2[k] = b - fb;
            }
            en.coef = pref * radial * node.weight;
            if (en.coef == 0.0) continue;
            entries_.push_back(en);
        }
        po.entry_count = entries_.size() - po.first_entry;
        if (po.entry_count > 0) offsets_.push_back(po);
    }
}

std::size_t QuartetOperator::quartets_per_apply() const {
    const int n = grid_->n, d = grid_->d;
    std::size_t total = 0;
    for (const auto& po : offsets_) {
        std::size_t pairs = 1;
        for (int k = 0; k < d; ++k) pairs *= static_cast<std::size_t>(n - std::abs(po.delta[k]));
        total += pairs * po.entry_count;
    }
    return total;
}

namespace {

template <class Run>
CollisionOutput reduce(const GridPtr& grid, std::size_t n_offsets, Run&& run, bool diagonal) {
    const auto& g = *grid;
    const int d = g.d;
    const std::size_t N = g.count;
    const std::size_t chunks = chunk_count(n_offsets);
    std::vector<std::vector<double>> acc(chunks, std::vector<double>(N * (d + 1), 0.0));
    std::vector<SweepTotals> tot(chunks);
    parallel_chunks(n_offsets, [&](std::size_t c, std::size_t b, std::size_t e) { run(b, e, acc[c].data(), tot[c]); });

    std::vector<double> total(N * (d + 1), 0.0);
    CollisionOutput out;
    for (std::size_t c = 0; c < chunks; ++c) {
        for (std::size_t a = 0; a < total.size(); ++a) total[a] += acc[c][a];
        out.dissipation += tot[c].dissipation;
        out.truncated += tot[c].truncated;
    }
    std::vector<double> r(N);
    for (std::size_t a = 0; a < N; ++a) r[a] = total[a * (d + 1)];
    if (!diagonal) {
        std::vector<double> rs(N);
        for (int k = 0; k < d; ++k) {
            for (std::size_t a = 0; a < N; ++a) rs[a] = total[a * (d + 1) + 1 + k];
            second_difference_transpose_add(g, k, rs, r);
        }
    }
    out.q = Field(grid);
    for (std::size_t a = 0; a < N; ++a) out.q[a] = r[a] / g.weights[a];
    return out;
}

}  // namespace

CollisionOutput QuartetOperator::apply(const Field& f, const Field& g) const {
    if (f.grid().d != grid_->d || f.grid().n != grid_->n || f.grid().vmax != grid_->vmax)
        throw std::invalid_argument("quartet operator applied on a different grid");
    require_same_grid(f, g);
    require_positive(f, "quartet operator");
    const int d = grid_->d;
    std::vector<double> data = d == 2 ? pack<2>(f, g, model_) : pack<3>(f, g, model_);
    auto out = reduce(
        grid_, offsets_.size(),
        [&](std::size_t b, std::size_t e, double* acc, SweepTotals& t) {
            if (d == 2)
                run_sweep<2>(model_, false, *grid_, offsets_, entries_, b, e, data.data(), acc, t);
            else
                run_sweep<3>(model_, false, *grid_, offsets_, entries_, b, e, data.data(), acc, t);
        },
        false);
    for (double x : out.q.values())
        if (!std::isfinite(x)) throw std::runtime_error("quartet operator produced a non-finite value");
    return out;
}

Field QuartetOperator::diagonal(const Field& f) const {
    require_positive(f, "quartet operator");
    const int d = grid_->d;
    Field zero(f.grid_ptr());
    std::vector<double> data = d == 2 ? pack<2>(f, zero, model_) : pack<3>(f, zero, model_);
    auto out = reduce(
        grid_, offsets_.size(),
        [&](std::size_t b, std::size_t e, double* acc, SweepTotals& t) {
            if (d == 2)
                run_sweep<2>(model_, true, *grid_, offsets_, entries_, b, e, data.data(), acc, t);
            else
                run_sweep<3>(model_, true, *grid_, offsets_, entries_, b, e, data.data(), acc, t);
        },
        true);
    return out.q;
}

Field entropy_variable(const Field& f, QuartetModel model) {
    require_positive(f, "entropy variable");
    Field g(f.grid_ptr());
    for (std::size_t a = 0; a < f.size(); ++a)
        g[a] = model == QuartetModel::wave4 ? 1.0 / f[a] : -(std::log(f[a]) + 1.0);
    return g;
}

CollisionOutput q4_apply(const Field& f, const KernelSpec& spec, const SphereRule& rule) {
    QuartetOperator op(f.grid_ptr(), spec, sigma_nodes(spec, rule, f.grid().d), QuartetModel::wave4);
    return op.apply(f, entropy_variable(f, QuartetModel::wave4));
}

CollisionOutput q_boltzmann_apply(const Field& f, const KernelSpec& spec, const SphereRule& rule) {
    QuartetOperator op(f.grid_ptr(), spec, sigma_nodes(spec, rule, f.grid().d), QuartetModel::boltzmann);
    return op.apply(f, entropy_variable(f, QuartetModel::boltzmann));
}

double log_mean(double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw std::domain_error("logarithmic mean needs positive arguments");
    const double x = std::log(b) - std::log(a);
    return x == 0.0 ? a : a * std::expm1(x) / x;
}

}  // namespace wkl

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wkl/collision.hpp"
#include "wkl/parallel.hpp"

namespace wkl {

namespace {

// Normalized triangular bump of half-width eta.
inline double bump(double x, double eta) {
    const double a = std::abs(x);
    return a >= eta ? 0.0 : (1.0 - a / eta) / eta;
}

}  // namespace

// Brute-force lattice sums with the momentum delta resolved by index arithmetic and the
// frequency delta mollified. Shares nothing with the sphere-parametrized operators: no
// interpolation and no angular rule.
Field oracle_q_mollified(const Field& f, const KernelSpec& spec, double eta, WaveKind which,
                         const OracleOptions& opt) {
    if (!(eta > 0.0)) throw std::invalid_argument("oracle mollifier width must be positive");
    require_positive(f, "oracle");
    const auto& grid = f.grid();
    const int d = grid.d, n = grid.n;
    const std::size_t N = grid.count;
    const double cost = which == WaveKind::four ? double(N) * N * N : 2.0 * N * N;
    if (cost > opt.budget) throw std::runtime_error("oracle cost exceeds the configured budget");

    std::vector<double> omega(N);
    std::vector<Vec> v(N);
    std::vector<std::array<int, 3>> idx(N);
    for (std::size_t a = 0; a < N; ++a) {
        v[a] = grid.node(a);
        idx[a] = grid.multi(a);
        omega[a] = opt.omega ? opt.omega(v[a]) : dot(v[a], v[a], d);
    }
    const double* W = grid.weights.data();
    auto node_of = [&](const std::array<int, 3>& I, std::size_t& out) {
        for (int k = 0; k < d; ++k)
            if (I[k] < 0 || I[k] >= n) return false;
        out = grid.flat(I);
        return true;
    };

    Field q(f.grid_ptr());
    if (which == WaveKind::four) {
        parallel_chunks(N, [&](std::size_t, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                double sum = 0.0;
                for (std::size_t j = 0; j < N; ++j) {
                    if (j == i) continue;
                    Vec kv{0, 0, 0}, mid{0, 0, 0};
                    double r2 = 0.0;
                    for (int c = 0; c < d; ++c) {
                        kv[c] = v[i][c] - v[j][c];
                        mid[c] = 0.5 * (v[i][c] + v[j][c]);
                        r2 += kv[c] * kv[c];
                    }
                    const double r = std::sqrt(r2);
                    for (int c = 0; c < d; ++c) kv[c] /= r;
                    // Co-area factor of the delta form relative to the sphere form.
                    const double coarea = 4.0 * std::pow(2.0 / r, d - 2);
                    const double radial = radial_sq(spec, r);
                    const double base = omega[i] + omega[j];
                    for (std::size_t l = 0; l < N; ++l) {
                        std::array<int, 3> I3{0, 0, 0};
                        for (int c = 0; c < d; ++c) I3[c] = idx[i][c] + idx[j][c] - idx[l][c];
                        std::size_t m;
                        if (!node_of(I3, m)) continue;
                        const double delta = bump(base - omega[l] - omega[m], eta);
                        if (delta == 0.0) continue;
                        double s2 = 0.0, ks = 0.0;
                        for (int c = 0; c < d; ++c) {
                            const double s = v[l][c] - mid[c];
                            s2 += s * s;
                            ks += kv[c] * s;
                        }
                        if (s2 == 0.0) continue;
                        const double cth = std::clamp(ks / std::sqrt(s2), -1.0, 1.0);
                        const double th = std::acos(cth);
                        if (d == 3 && (th == 0.0 || th == std::numbers::pi)) continue;
                        double kern = coarea * radial * angular_sq(spec, th, d);
                        // A lattice point exactly on the support edge is shared with its mirror.
                        if (cth == 0.0) kern *= 0.5;
                        if (kern == 0.0) continue;
                        const double prod = f[i] * f[j] * f[l] * f[m];
                        const double grad = 1.0 / f[i] + 1.0 / f[j] - 1.0 / f[l] - 1.0 / f[m];
                        sum += W[j] * W[l] * kern * delta * prod * grad;
                    }
                }
                q[i] = 4.0 * std::numbers::pi * sum;
            }
        });
        return q;
    }

    if (n % 2 == 0) throw std::invalid_argument("three-wave oracle needs a grid with a node at the origin (odd n)");
    const int c0 = (n - 1) / 2;
    parallel_chunks(N, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            double gain = 0.0, loss = 0.0;
            const double ki = radial_sq(spec, std::sqrt(dot(v[i], v[i], d)));
            for (std::size_t l = 0; l < N; ++l) {
                std::array<int, 3> I{0, 0, 0};
                std::size_t m;
                // gain: v = v_l + v_m
                for (int c = 0; c < d; ++c) I[c] = idx[i][c] - idx[l][c] + c0;
                if (node_of(I, m)) {
                    const double delta = bump(omega[i] - omega[l] - omega[m], eta);
                    if (delta != 0.0) gain += W[l] * ki * delta * (f[l] * f[m] - f[i] * f[l] - f[i] * f[m]);
                }
                // loss: v_m = v + v_l is the sum wave
                for (int c = 0; c < d; ++c) I[c] = idx[i][c] + idx[l][c] - c0;
                if (node_of(I, m)) {
                    const double delta = bump(omega[m] - omega[i] - omega[l], eta);
                    if (delta != 0.0) {
                        const double ks = radial_sq(spec, std::sqrt(dot(v[m], v[m], d)));
                        loss += W[l] * ks * delta * (f[i] * f[l] - f[m] * f[i] - f[m] * f[l]);
                    }
                }
            }
            q[i] = std::numbers::pi * (gain - 2.0 * loss);
        }
    });
    return q;
}

}  // namespace wkl

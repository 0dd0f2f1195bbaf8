#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wkl/collision.hpp"
#include "wkl/parallel.hpp"

namespace wkl {

std::array<double, 9> projector(const Vec& u, int d) {
    const double u2 = dot(u, u, d);
    if (!(std::sqrt(u2) > 1e-14)) throw std::invalid_argument("projector of a vanishing vector");
    std::array<double, 9> P{};
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) P[a * 3 + b] = (a == b ? 1.0 : 0.0) - u[a] * u[b] / u2;
    return P;
}

CollisionOutput landau_apply_M(const Field& f, const Field& g, const KernelSpec& spec) {
    require_same_grid(f, g);
    require_positive(f, "landau operator");
    const auto& grid = f.grid();
    const int d = grid.d;
    const std::size_t N = grid.count;
    const double* W = grid.weights.data();

    // F = G g per axis, packed node-major.
    std::vector<double> F(N * d);
    {
        std::vector<double> tmp(N);
        for (int k = 0; k < d; ++k) {
            diff_axis(grid, k, g.values(), tmp);
            for (std::size_t a = 0; a < N; ++a) F[a * d + k] = tmp[a];
        }
    }
    std::vector<Vec> v(N);
    for (std::size_t a = 0; a < N; ++a) v[a] = grid.node(a);
    const double gamma = spec.gamma;

    const std::size_t chunks = chunk_count(N);
    std::vector<std::vector<double>> acc(chunks, std::vector<double>(N * d, 0.0));
    std::vector<double> diss(chunks, 0.0);
    parallel_chunks(N, [&](std::size_t c, std::size_t b, std::size_t e) {
        auto& A = acc[c];
        double D = 0.0;
        for (std::size_t i = b; i < e; ++i) {
            for (std::size_t j = i + 1; j < N; ++j) {
                double r[3], dF[3], r2 = 0.0, rdF = 0.0;
                for (int k = 0; k < d; ++k) {
                    r[k] = v[i][k] - v[j][k];
                    dF[k] = F[i * d + k] - F[j * d + k];
                    r2 += r[k] * r[k];
                    rdF += r[k] * dF[k];
                }
                const double ff = f[i] * f[j];
                const double s = (gamma == 0.0 ? 1.0 : std::pow(r2, gamma)) * ff * ff;
                double PdF = 0.0;
                for (int k = 0; k < d; ++k) {
                    // B0^2 Pi dF = r^{2 gamma} (r^2 dF - r (r . dF))
                    const double P = s * (r2 * dF[k] - r[k] * rdF);
                    A[i * d + k] += W[j] * P;
                    A[j * d + k] -= W[i] * P;
                    PdF += P * dF[k];
                }
                D += W[i] * W[j] * PdF;
            }
        }
        diss[c] = D;
    });

    std::vector<double> A(N * d, 0.0);
    CollisionOutput out;
    for (std::size_t c = 0; c < chunks; ++c) {
        for (std::size_t a = 0; a < A.size(); ++a) A[a] += acc[c][a];
        out.dissipation += diss[c];
    }
    out.dissipation *= 4.0 * std::numbers::pi;

    out.q = Field(f.grid_ptr());
    std::vector<double> wa(N), t(N);
    for (int k = 0; k < d; ++k) {
        for (std::size_t a = 0; a < N; ++a) wa[a] = W[a] * A[a * d + k];
        diff_axis_transpose(grid, k, wa, t);
        for (std::size_t a = 0; a < N; ++a) out.q[a] += t[a];
    }
    for (std::size_t a = 0; a < N; ++a) {
        out.q[a] *= 4.0 * std::numbers::pi / W[a];
        if (!std::isfinite(out.q[a])) throw std::runtime_error("landau operator produced a non-finite value");
    }
    return out;
}

CollisionOutput q_landau_apply(const Field& f, const KernelSpec& spec) {
    require_positive(f, "landau operator");
    Field g(f.grid_ptr());
    for (std::size_t a = 0; a < f.size(); ++a) g[a] = 1.0 / f[a];
    return landau_apply_M(f, g, spec);
}

}  // namespace wkl

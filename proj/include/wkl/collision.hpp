#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "wkl/grid.hpp"
#include "wkl/kernels.hpp"

namespace wkl {

struct CollisionOutput {
    Field q;
    double dropped_mass = 0.0;  // contribution lost to the truncated domain; integrate(q) = -dropped_mass
    double dissipation = 0.0;   // <g, M g> for the entropy variable g of the same pass
    std::size_t skipped_nodes = 0;  // nodes excluded by a floor (three-wave only)
    std::size_t truncated = 0;      // quadrature points that left the grid hull
};

struct ResonantQuartet {
    Vec v, v_star, v_prime, v_prime_star;
    double theta = 0.0;
};
ResonantQuartet make_quartet(const Vec& v, const Vec& v_star, const Vec& sigma, int d);

// Angular node expressed in the frame of the pair: sigma = cos_theta * k + perp[0] e1 + perp[1] e2,
// where k = (v - v_*)/|v - v_*| and e1, e2 complete k to an orthonormal basis.
// The weight already contains the angular part of the kernel.
struct AngularNode {
    double cos_theta = 1.0;
    std::array<double, 2> perp{0.0, 0.0};
    double weight = 0.0;
};

// sigma-path nodes: sphere rule times the angular kernel, zero-weight nodes dropped.
std::vector<AngularNode> sigma_nodes(const KernelSpec& spec, const SphereRule& rule, int d);
// (theta, p)-path nodes: sigma = cos(theta) k + sin(theta) p with p on the unit sphere of k-perp.
// Weights are theta_weight * p_weight * angular profile (beta or its scaled version, no 1/2).
std::vector<AngularNode> theta_p_nodes(const KernelSpec& spec, const std::vector<double>& thetas,
                                       const std::vector<double>& theta_weights, const SphereRule& p_rule,
                                       int d);
// theta rule that reproduces a sigma rule exactly when combined with the p-rule.
void matched_theta_rule(const SphereRule& sigma_rule, int d, std::vector<double>& thetas,
                        std::vector<double>& weights);

enum class QuartetModel { wave4, boltzmann };

// Weak-form quartet operator g -> M(f) g. Sweeps unordered node pairs and angular nodes,
// evaluates the entropy variable at the off-grid points with a quadratic-exact interpolant
// and deposits through its transpose.
class QuartetOperator {
public:
    QuartetOperator(GridPtr grid, const KernelSpec& spec, std::vector<AngularNode> nodes, QuartetModel model);

    CollisionOutput apply(const Field& f, const Field& g) const;
    // Diagonal of the multilinear part of M(f), used for preconditioning.
    Field diagonal(const Field& f) const;
    std::size_t quartets_per_apply() const;

    struct Entry {
        std::array<int, 3> off1{}, off2{};
        std::array<double, 3> t1{}, t2{};
        double coef = 0.0;
    };
    struct PairOffset {
        std::array<int, 3> delta{};
        std::size_t first_entry = 0, entry_count = 0;
    };

private:
    GridPtr grid_;
    QuartetModel model_;
    std::vector<PairOffset> offsets_;
    std::vector<Entry> entries_;
};

Field entropy_variable(const Field& f, QuartetModel model);

CollisionOutput q4_apply(const Field& f, const KernelSpec& spec, const SphereRule& rule);
CollisionOutput q_boltzmann_apply(const Field& f, const KernelSpec& spec, const SphereRule& rule);

struct ThreeWaveOptions {
    double v_min = -1.0;         // negative: 0.25 h
    double plane_spacing = -1.0; // negative: h/4 in d=2, h/2 in d=3
};
// Pointwise gain minus loss.
CollisionOutput q3_apply(const Field& f, const KernelSpec& spec, const SphereRule& rule,
                         const ThreeWaveOptions& opt = {});
// Weak form on the (v, sigma) manifold: g -> M3(f) g, and Q3 = M3(f) f^{-1}.
CollisionOutput q3_weak_apply(const Field& f, const Field& g, const KernelSpec& spec, const SphereRule& rule);

// Landau-type limit: A = sum_* B0^2 (f f_*)^2 Pi (G g - (G g)_*), M g = 4 pi W^{-1} G^T (W A).
CollisionOutput landau_apply_M(const Field& f, const Field& g, const KernelSpec& spec);
CollisionOutput q_landau_apply(const Field& f, const KernelSpec& spec);

// Orthogonal projector onto the complement of u, row-major d x d in a 3x3 array.
std::array<double, 9> projector(const Vec& u, int d);

double log_mean(double a, double b);

enum class WaveKind { three, four };
struct OracleOptions {
    std::function<double(const Vec&)> omega;  // empty: |v|^2
    double budget = 5e9;                       // maximum inner-loop evaluations
};
Field oracle_q_mollified(const Field& f, const KernelSpec& spec, double eta, WaveKind which,
                         const OracleOptions& opt = {});

}  // namespace wkl

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wkl/collision.hpp"
#include "wkl/grid.hpp"
#include "wkl/kernels.hpp"

namespace wkl {

// Closed-form test function with its exact gradient.
struct AnalyticFn {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> grad;
};
// a * exp(-|v - c|^2 / width^2) + floor
AnalyticFn gaussian_fn(const Vec& center, double width, double amplitude, int d, double floor = 0.0);
AnalyticFn affine_fn(const Vec& a, double c, int d);
AnalyticFn energy_fn(int d);  // |v|^2

// Integral over p in S^{d-2} of f'f'_* (phi' + phi'_* - phi - phi_*) with sigma = cos(theta) k + sin(theta) p.
double lemma31_lhs(const AnalyticFn& f, const AnalyticFn& phi, const Vec& v, const Vec& v_star, double theta,
                   const SphereRule& p_rule, int d);
// Second-order expansion of the same integral in theta.
double lemma31_rhs(const AnalyticFn& f, const AnalyticFn& phi, const Vec& v, const Vec& v_star, double theta,
                   int d);

struct LemmaCheck {
    std::vector<double> thetas, lhs, rhs, errors, ratios;  // ratio = |lhs - rhs| / theta^2
    double slope = 0.0;          // least-squares slope of log|lhs - rhs| against log theta
    bool ratios_decreasing = false;
};
LemmaCheck lemma31_check(const AnalyticFn& f, const AnalyticFn& phi, const Vec& v, const Vec& v_star,
                         const std::vector<double>& thetas, int d, int p_nodes = 64);

// Q^eps through the (v_*, theta, p) decomposition: Gauss-Legendre in theta over the support
// [0, eps/2] of the scaled profile.
CollisionOutput q_grazing_apply(const Field& f, const KernelSpec& spec, int theta_nodes, int p_nodes);

struct ConvergenceReport {
    std::vector<double> epsilons, errors, abs_errors, observed_rates;
    bool monotone = false;
    double path_consistency = 0.0;  // sigma path vs (theta, p) path, unscaled kernel
    double landau_norm = 0.0;
    int theta_nodes = 0, p_nodes = 0, sigma_nodes = 0;
};
struct GrazingOptions {
    int theta_nodes = 32;
    int p_nodes = 16;      // used in d=3 only
    int sigma_nodes = 16;  // for the path-consistency comparison
    bool check_paths = true;
};
ConvergenceReport grazing_convergence(const Field& f, const KernelSpec& base, const std::vector<double>& epsilons,
                                      const GrazingOptions& opt = {});

// 0.7 exp(-|v - a|^2) + 0.3 exp(-|v + a|^2 / 2) + 1e-6 with a = (1, 0, ...).
Field default_mixture(const GridPtr& grid);

}  // namespace wkl

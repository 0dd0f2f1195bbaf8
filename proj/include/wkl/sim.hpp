#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wkl/collision.hpp"
#include "wkl/generic.hpp"
#include "wkl/grid.hpp"

namespace wkl {

enum class Integrator { rk4, euler };
Integrator parse_integrator(const std::string& name);
std::string to_string(Integrator i);

struct SimConfig {
    Model model = Model::wave4;
    int d = 2, n = 33;
    double vmax = 5.0;
    KernelSpec spec;
    int sigma_nodes = 16;
    ThreeWaveOptions three;
    double dt = 1e-3, t_end = 1.0;
    int snapshot_stride = 10;
    double f_min = 1e-14;
    Integrator integrator = Integrator::rk4;
    double tol_H_constant = 10.0;

    void validate() const;  // throws std::invalid_argument naming the field
};

// f = 1 / (mu + beta |v|^2)
Field rayleigh_jeans(const GridPtr& grid, double mu, double beta);

// Right-hand side of the homogeneous equation for a model: the pointwise three-wave
// operator for wave3, M(f) dS(f) otherwise.
using Rhs = std::function<CollisionOutput(const Field&)>;
Rhs make_rhs(const BuildingBlocks& blocks, const ThreeWaveOptions& three = {});

struct PositivityError : std::runtime_error {
    std::size_t node;
    double value;
    PositivityError(const std::string& msg, std::size_t node_, double value_)
        : std::runtime_error(msg), node(node_), value(value_) {}
};

struct StepResult {
    Field f;
    double dt_used = 0.0;
    int halvings = 0;
    double dropped = 0.0;  // stage-weighted dropped mass over the step
};
// One explicit step. k1 is the right-hand side at f (reused when given). A step whose result has a
// node at or below f_min is retried at half the step, up to 8 times.
StepResult step(const Field& f, double dt, Integrator integrator, const Rhs& rhs, double f_min,
                const CollisionOutput* k1 = nullptr);

struct InvariantSeries {
    Model model = Model::wave4;
    int d = 2;
    std::vector<double> times, mass, energy, entropy_H, entropy_B, dissipation, dropped_mass;
    std::vector<Vec> momentum;

    double entropy(std::size_t k) const;  // the model's entropy: entropy_H, or -entropy_B for boltzmann
    void append(double t, const Field& f, double dissipation, double dropped);
    std::size_t size() const { return times.size(); }
};

struct EntropyWarning {
    double t = 0.0, decrease = 0.0, tolerance = 0.0;
};

struct SimResult {
    std::vector<Field> snapshots;
    InvariantSeries series;
    std::vector<EntropyWarning> warnings;
    std::size_t steps = 0, halvings = 0;
    std::size_t strict_increase_violations = 0;  // accepted steps where the entropy did not grow
};
SimResult run_simulation(const SimConfig& cfg, const Field& f0);
SimResult run_simulation(const SimConfig& cfg, const BuildingBlocks& blocks, const Field& f0);

// Central-difference dS/dt against the recorded dissipation, relative to max |dissipation|.
double finite_diff_H_check(const InvariantSeries& series);

// Stationary state with the same mass, momentum and energy: 1/f = a + b.v + c|v|^2.
struct RJFit {
    double mu = 0.0, beta = 0.0;
    Vec drift{0, 0, 0};
    Field f;
    int iterations = 0;
    bool converged = false;
};
RJFit fit_rayleigh_jeans(const Field& f);

BuildingBlocks blocks_for(const SimConfig& cfg);

}  // namespace wkl

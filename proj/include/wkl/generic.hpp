#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "wkl/collision.hpp"
#include "wkl/grid.hpp"
#include "wkl/kernels.hpp"

namespace wkl {

enum class Model { wave3, wave4, boltzmann, landau };
Model parse_model(const std::string& name);
std::string to_string(Model m);

// Periodic x in [0, Lx) times a velocity box [-vmax, vmax]^dv. With dv = 2 the second
// velocity component is passive: the symplectic pairing couples x with v_1 only.
struct PhaseGrid {
    int nx = 16, dv = 1, nv = 16;
    double Lx = 0.0, vmax = 0.0, hx = 0.0, hv = 0.0;
    std::size_t count = 0;
    std::vector<double> weights;

    std::size_t nvel() const { return dv == 1 ? nv : std::size_t(nv) * nv; }
    double x(std::size_t a) const;
    double v(std::size_t a, int comp) const;
};
using PhaseGridPtr = std::shared_ptr<const PhaseGrid>;
PhaseGridPtr build_phase_grid(int nx, double Lx, int dv, int nv, double vmax);

struct PhaseField {
    PhaseGridPtr grid;
    std::vector<double> values;
};
double phase_inner(const PhaseField& a, const PhaseField& b);
double phase_norm(const PhaseField& a);

// L(f) g = Gx*(f Gv g) - Gv*(f Gx g) with * the weighted adjoint: exactly antisymmetric.
PhaseField apply_L(const PhaseField& f, const PhaseField& g);

struct BuildingBlocks {
    Model model = Model::wave4;
    GridPtr grid;
    KernelSpec spec;
    SphereRule rule;
    PhaseGridPtr phase;
    std::shared_ptr<const QuartetOperator> quartet;  // wave4 and boltzmann

    Field dE() const;        // |v|^2 / 2
    Field dE_omega() const;  // |v|^2
    Field dS(const Field& f) const;
    double entropy(const Field& f) const;
    CollisionOutput collision(const Field& f) const;  // apply_M(f, dS(f))
    bool has_diagonal() const { return static_cast<bool>(quartet); }
    Field diagonal(const Field& f) const;
};

BuildingBlocks make_blocks(Model model, GridPtr grid, const KernelSpec& spec, const SphereRule& rule,
                           PhaseGridPtr phase = nullptr);
CollisionOutput apply_M(const BuildingBlocks& blocks, const Field& f, const Field& g);

struct StructureReport {
    double antisymmetry_residual = 0.0;
    double symmetry_residual = 0.0;
    double psd_min_rayleigh = 0.0;
    double degeneracy_LdS = 0.0;
    double degeneracy_MdE = 0.0;
    double jacobi_residual = 0.0;
    double h_velocity = 0.0;
    double h_phase_x = 0.0;
    double h_phase_v = 0.0;
};

// Smooth random test field on the velocity grid (a few low Fourier modes).
using Rng = std::mt19937_64;
double uniform01(Rng& rng);  // 53-bit, identical on every platform
Field random_smooth_field(const GridPtr& grid, Rng& rng, int modes = 4);
PhaseField random_smooth_phase_field(const PhaseGridPtr& grid, Rng& rng, int modes = 4);
PhaseField default_phase_density(const PhaseGridPtr& grid);

StructureReport check_structure(const BuildingBlocks& blocks, const Field& f, int trials, std::uint64_t seed);
double phase_antisymmetry(const PhaseGridPtr& grid, int trials, std::uint64_t seed);
double phase_degeneracy_LdS(const PhaseField& f);
double jacobi_residual(const PhaseField& f, std::uint64_t seed);

struct DeGiorgiOptions {
    double lambda = 1e-10;
    int max_iterations = 4000;
    double tolerance = 1e-12;
};
struct DeGiorgiResult {
    double value = 0.0;
    double entropy_change = 0.0;    // S(z0) - S(zT)
    double rate_term = 0.0;         // 1/2 int |dz/dt|^2_{M^-1}
    double dissipation_term = 0.0;  // 1/2 int |dS|^2_M
    double removed_fraction = 0.0;  // largest kernel share of dz/dt removed before inversion
    bool converged = true;
    double max_relative_residual = 0.0;
};
// Solves (M + lambda) x = y for y in the range of M by preconditioned conjugate gradients
// in the weighted inner product.
struct InverseNorm {
    double value = 0.0;
    double removed_fraction = 0.0;
    bool converged = true;
    double relative_residual = 0.0;
    int iterations = 0;
};
InverseNorm inverse_norm_sq(const BuildingBlocks& blocks, const Field& f, const Field& y, const DeGiorgiOptions& opt);
DeGiorgiResult degiorgi_residual(const std::vector<double>& times, const std::vector<Field>& trajectory,
                                 const BuildingBlocks& blocks, const DeGiorgiOptions& opt = {});

struct Functionals {
    double mass = 0.0;
    Vec momentum{0, 0, 0};
    double energy = 0.0;        // |v|^2 / 2
    double energy_omega = 0.0;  // |v|^2
    double entropy_H = 0.0;     // int log f
    double entropy_B = 0.0;     // int f log f
};
Functionals eval_functionals(const Field& f);

// Weighted projection onto span{1, v, |v|^2} (without 1 for the three-wave model).
Field project_invariants(const Field& y, bool include_constant = true);

}  // namespace wkl

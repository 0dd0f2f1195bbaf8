#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "wkl/kernels.hpp"
#include "wkl/sim.hpp"

namespace wkl {

using ordered_json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridConfig {
    int d = 2, n = 33;
    double vmax = 5.0;
};

struct KernelConfig {
    double gamma = 0.0;
    std::string angular = "constant";
    double theta0 = 0.1;
    int sigma_nodes = 16;
};

struct SimBlock {
    double dt = 1e-3, t_end = 1.0;
    int snapshot_stride = 10;
    double f_min = 1e-14;
    std::string integrator = "rk4";
    double tol_H_constant = 10.0;
    std::string initial = "mixture";  // mixture | rayleigh-jeans | gaussian
};

struct GrazingBlock {
    std::vector<double> epsilons{0.5, 0.25, 0.125};
    int theta_nodes = 32, p_nodes = 16, sigma_nodes = 16;
};

struct LemmaBlock {
    int d = 2;
    std::vector<double> thetas{0.2, 0.1, 0.05, 0.025};
    std::vector<double> v{1.0, 0.0}, v_star{0.0, 1.0};
    std::string phi = "gaussian";  // gaussian | affine | energy
    int p_nodes = 64;
};

struct PhaseBlock {
    int nx = 32, nv = 32, dv = 1;
    double Lx = 6.283185307179586, vmax = 5.0;
};

struct CheckBlock {
    int trials = 100;
    PhaseBlock phase;
    int jacobi_n = 16;
    double jacobi_vmax = 3.5;  // velocity half-width of the Jacobi grid; 16 points must resolve the density
};

struct OracleBlock {
    int n = 17;
    double vmax = 2.5, eta4 = 0.5, eta3 = 0.4, speed_floor = 0.5;
    int sigma_nodes = 16;
};

struct ThreeWaveBlock {
    double v_min = -1.0, plane_spacing = -1.0;
};

struct Tolerances {
    double rj_stationarity = 1e-12;
    double antisymmetry = 1e-12;
    double symmetry = 1e-10;
    double min_rayleigh = -1e-12;
    double degeneracy_MdE = 1e-12;
    double refinement_ratio = 3.0;
    double fd_H = 0.05;
    double mass_drift = 1e-12;
    double energy_drift = 1e-3;
    double grazing_terminal = 0.1;
    double path_consistency = 1e-6;
    double lemma_slope = 2.5;
    double oracle4 = 0.02;
    double oracle3 = 0.05;
};

struct ExperimentConfig {
    std::string command;
    std::string model = "wave4";
    GridConfig grid;
    KernelConfig kernel;
    double mu = 1.0, beta = 1.0;
    SimBlock sim;
    GrazingBlock grazing;
    LemmaBlock lemma31;
    CheckBlock check;
    OracleBlock oracle;
    ThreeWaveBlock three_wave;
    Tolerances tolerances;
    std::uint64_t seed = 42;

    KernelSpec kernel_spec() const;
    SimConfig sim_config() const;
};

const std::vector<std::string>& known_commands();

// Strict JSON: duplicate keys are a parse error.
ordered_json parse_strict_json(const std::string& text);
// Applies key=value with a dotted key path; the value is read as JSON, or as a string if that fails.
void apply_override(ordered_json& doc, const std::string& assignment);
// Validates and fills defaults. Unknown keys, type mismatches and out-of-range values raise
// ConfigError with the offending key path.
ExperimentConfig parse_config(const ordered_json& doc);
// command, when given, fills a missing "command" key and must match a present one.
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides,
                             const std::string& command = "");
ordered_json to_json(const ExperimentConfig& cfg);

}  // namespace wkl

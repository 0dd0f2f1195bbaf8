#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wkl/config.hpp"

namespace wkl {

struct CheckResult {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    std::string relation;  // "<=", ">=" or "=="
    bool pass = false;
};

struct ExperimentOutcome {
    std::vector<CheckResult> checks;
    ordered_json report;
    bool all_pass() const;
};

// Runs the configured command, writing effective-config.json and the command's reports
// into out_dir. Throws on hard errors.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// 0 when every check passes, 2 otherwise.
int exit_code(const ExperimentOutcome& outcome);

// Relative weighted L2 distance on the nodes accepted by the mask (all when empty).
double relative_l2(const Field& a, const Field& ref, const std::vector<bool>& mask = {});

}  // namespace wkl

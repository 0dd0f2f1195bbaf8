#pragma once

#include <optional>
#include <string>

namespace wkl {

enum class AngularKind { constant, inverse_square_cutoff };

// Angular profile supported on [0, pi/2], normalized so that its theta^2 moment
// equals 8(d-1)/|S^{d-2}|.
struct AngularBase {
    AngularKind kind = AngularKind::constant;
    int d = 2;
    double theta0 = 0.0;  // cutoff for the inverse-square kind
    double C = 0.0;

    double operator()(double u) const;
};

AngularBase base_beta(AngularKind kind, int d, double theta0 = 0.1);
double moment_target(int d);
double scaled_beta(const AngularBase& base, double eps, double theta);

struct KernelSpec {
    double gamma = 0.0;
    AngularBase angular;
    std::optional<double> epsilon;  // empty: unscaled
};

double radial_sq(const KernelSpec& spec, double r);          // B(r)^2 = r^{2 gamma}
double landau_radial_sq(const KernelSpec& spec, double r);   // B(r)^2 r^2
// Angular part of |V|^2 (the full kernel divided by B(r)^2).
double angular_sq(const KernelSpec& spec, double theta, int d);
double eval_kernel_sq(const KernelSpec& spec, double r, double theta, int d);

AngularKind parse_angular_kind(const std::string& name);
std::string to_string(AngularKind kind);

}  // namespace wkl

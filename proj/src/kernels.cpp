#include "wkl/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wkl/grid.hpp"

namespace wkl {

namespace {
constexpr double kHalfPi = 0.5 * std::numbers::pi;
}

double moment_target(int d) {
    if (d != 2 && d != 3) throw std::invalid_argument("kernel dimension must be 2 or 3");
    return 8.0 * (d - 1) / sphere_area(d - 2);
}

double AngularBase::operator()(double u) const {
    if (u < 0.0 || u > kHalfPi) return 0.0;
    if (kind == AngularKind::constant) return C;
    if (u < theta0) return 0.0;
    return C / (u * u);
}

AngularBase base_beta(AngularKind kind, int d, double theta0) {
    AngularBase b;
    b.kind = kind;
    b.d = d;
    const double m = moment_target(d);
    if (kind == AngularKind::constant) {
        b.C = 3.0 * m / std::pow(kHalfPi, 3);
    } else {
        if (!(theta0 > 0.0 && theta0 < kHalfPi))
            throw std::invalid_argument("inverse-square cutoff must lie in (0, pi/2)");
        b.theta0 = theta0;
        b.C = m / (kHalfPi - theta0);
    }
    return b;
}

double scaled_beta(const AngularBase& base, double eps, double theta) {
    const double s = std::numbers::pi / eps;
    return s * s * s * base(s * theta);
}

double radial_sq(const KernelSpec& spec, double r) {
    return spec.gamma == 0.0 ? 1.0 : std::pow(r, 2.0 * spec.gamma);
}

double landau_radial_sq(const KernelSpec& spec, double r) { return radial_sq(spec, r) * r * r; }

double angular_sq(const KernelSpec& spec, double theta, int d) {
    if (theta < 0.0 || theta > std::numbers::pi) throw std::invalid_argument("deviation angle outside [0, pi]");
    const double beta = spec.epsilon ? scaled_beta(spec.angular, *spec.epsilon, theta) : spec.angular(theta);
    if (beta == 0.0) return 0.0;
    double b = beta;
    if (d == 3) {
        const double s = std::sin(theta);
        if (!(s > 0.0)) throw std::domain_error("angular kernel evaluated at a pole in d=3");
        b /= s;
    }
    return spec.epsilon ? 0.5 * b : b;
}

double eval_kernel_sq(const KernelSpec& spec, double r, double theta, int d) {
    if (r < 0.0) throw std::invalid_argument("negative relative speed");
    return radial_sq(spec, r) * angular_sq(spec, theta, d);
}

AngularKind parse_angular_kind(const std::string& name) {
    if (name == "constant") return AngularKind::constant;
    if (name == "inverse-square-cutoff") return AngularKind::inverse_square_cutoff;
    throw std::invalid_argument("unknown angular base '" + name + "'");
}

std::string to_string(AngularKind kind) {
    return kind == AngularKind::constant ? "constant" : "inverse-square-cutoff";
}

}  // namespace wkl

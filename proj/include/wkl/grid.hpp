#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace wkl {

// Velocity vectors are stored in three slots; only the first d are used.
using Vec = std::array<double, 3>;

struct VelocityGrid {
    int d = 2;
    int n = 0;
    double vmax = 0.0;
    double h = 0.0;
    std::size_t count = 0;
    std::vector<double> weights;  // trapezoid, one per node

    std::size_t flat(const std::array<int, 3>& idx) const;
    std::array<int, 3> multi(std::size_t node) const;
    double coord(int i) const { return -vmax + h * i; }
    Vec node(std::size_t node) const;
    std::size_t stride(int axis) const;
};

using GridPtr = std::shared_ptr<const VelocityGrid>;

GridPtr build_velocity_grid(int d, int n, double vmax);

// Nodal values on a velocity grid. The grid is shared and immutable.
class Field {
public:
    Field() = default;
    explicit Field(GridPtr grid, double fill = 0.0);
    Field(GridPtr grid, std::vector<double> values);

    const VelocityGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    template <class F>
    static Field from_function(GridPtr grid, F&& fn) {
        Field out(grid);
        for (std::size_t a = 0; a < out.size(); ++a) out.values_[a] = fn(grid->node(a));
        return out;
    }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

void require_same_grid(const Field& a, const Field& b);
void require_positive(const Field& f, const char* what);

double integrate(const Field& f);
double inner(const Field& a, const Field& b);  // weighted by the grid weights
double norm_l2(const Field& f);                // weighted
double norm_inf(const Field& f);
Field axpy(double a, const Field& x, const Field& y);  // a x + y

// Second-order central differences, one-sided second order at the boundary.
std::vector<Field> grad_v(const Field& f);
Field div_v(const std::vector<Field>& vfield);
// Derivative of f along one axis with the same stencil as grad_v, and its transpose.
void diff_axis(const VelocityGrid& g, int axis, std::span<const double> in, std::span<double> out);
void diff_axis_transpose(const VelocityGrid& g, int axis, std::span<const double> in,
                         std::span<double> out);

// Cell lookup for a point in lattice coordinates. Returns false outside the hull.
struct CellStencil {
    int count = 0;  // 2^d
    std::array<std::size_t, 8> node{};
    std::array<double, 8> weight{};
    std::array<double, 3> t{};  // fractional position inside the cell, per axis
};
bool locate(const VelocityGrid& g, const Vec& p, CellStencil& out);

double interpolate(const Field& f, const Vec& p);
// Adds mass * (transposed interpolation weights) / node weight. Returns the dropped
// amount (the full mass when p lies outside the hull, else 0).
double deposit(Field& acc, const Vec& p, double mass);

// Interpolant that reproduces quadratics: multilinear interpolation minus the
// per-axis curvature correction built from nodal second differences.
Field second_difference(const Field& f, int axis);  // not divided by h^2
double interpolate_quadratic(const Field& f, const std::vector<Field>& second_diffs, const Vec& p);
// Transpose of the per-axis second difference, accumulated into out.
void second_difference_transpose_add(const VelocityGrid& g, int axis, std::span<const double> in,
                                     std::span<double> out);

struct SphereRule {
    int dim = 0;
    std::vector<Vec> nodes;  // embedded in R^{dim+1}
    std::vector<double> weights;
};

SphereRule sphere_rule(int dim, int n);
SphereRule rotate_rule_to_plane(const SphereRule& rule, const Vec& k);
double sphere_area(int dim);

// Orthonormal completion of a unit vector k in R^d: returns d-1 vectors.
std::array<Vec, 2> perpendicular_basis(const Vec& k, int d);

// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w);

inline double dot(const Vec& a, const Vec& b, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace wkl

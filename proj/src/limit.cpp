#include "wkl/limit.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wkl {

namespace {

constexpr double kPi = std::numbers::pi;

Vec sub(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

// (|r|^2 I - r r^T) u
Vec transverse(const Vec& r, const Vec& u, int d) {
    const double rr = dot(r, r, d), ru = dot(r, u, d);
    Vec out{0, 0, 0};
    for (int k = 0; k < d; ++k) out[k] = rr * u[k] - ru * r[k];
    return out;
}

// Sixth-order central first derivative.
template <class F>
double d6(F&& fn, double h) {
    return (-fn(-3 * h) + 9 * fn(-2 * h) - 45 * fn(-h) + 45 * fn(h) - 9 * fn(2 * h) + fn(3 * h)) / (60.0 * h);
}

void require_angle(double theta) {
    if (!(theta > 0.0 && theta <= 0.5 * kPi)) throw std::invalid_argument("lemma angle must lie in (0, pi/2]");
}

}  // namespace

AnalyticFn gaussian_fn(const Vec& center, double width, double amplitude, int d, double floor) {
    const double s = 1.0 / (width * width);
    AnalyticFn fn;
    fn.value = [=](const Vec& v) {
        const Vec x = sub(v, center);
        return amplitude * std::exp(-s * dot(x, x, d)) + floor;
    };
    fn.grad = [=](const Vec& v) {
        const Vec x = sub(v, center);
        const double e = amplitude * std::exp(-s * dot(x, x, d));
        Vec g{0, 0, 0};
        for (int k = 0; k < d; ++k) g[k] = -2.0 * s * x[k] * e;
        return g;
    };
    return fn;
}

AnalyticFn affine_fn(const Vec& a, double c, int d) {
    return {[=](const Vec& v) { return dot(a, v, d) + c; }, [=](const Vec&) { return a; }};
}

AnalyticFn energy_fn(int d) {
    return {[=](const Vec& v) { return dot(v, v, d); },
            [=](const Vec& v) {
                Vec g{0, 0, 0};
                for (int k = 0; k < d; ++k) g[k] = 2.0 * v[k];
                return g;
            }};
}

double lemma31_lhs(const AnalyticFn& f, const AnalyticFn& phi, const Vec& v, const Vec& v_star, double theta,
                   const SphereRule& p_rule, int d) {
    require_angle(theta);
    if (p_rule.dim != d - 2) throw std::invalid_argument("lemma: p rule must live on S^{d-2}");
    const Vec r = sub(v, v_star);
    const double rn = std::sqrt(dot(r, r, d));
    if (!(rn > 0.0)) throw std::invalid_argument("lemma: v must differ from v_*");
    Vec k{0, 0, 0};
    for (int c = 0; c < d; ++c) k[c] = r[c] / rn;
    const auto basis = perpendicular_basis(k, d);
    const double ct = std::cos(theta), st = std::sin(theta);
    const double base = phi.value(v) + phi.value(v_star);
    double sum = 0.0;
    for (std::size_t m = 0; m < p_rule.nodes.size(); ++m) {
        Vec sigma{0, 0, 0};
        for (int c = 0; c < d; ++c) {
            double p = p_rule.nodes[m][0] * basis[0][c];
            if (d == 3) p += p_rule.nodes[m][1] * basis[1][c];
            sigma[c] = ct * k[c] + st * p;
        }
        const auto q = make_quartet(v, v_star, sigma, d);
        // Energy and momentum are conserved exactly; the difference is formed first to keep
        // the collision-invariant cases at roundoff.
        const double dphi = (phi.value(q.v_prime) + phi.value(q.v_prime_star)) - base;
        sum += p_rule.weights[m] * f.value(q.v_prime) * f.value(q.v_prime_star) * dphi;
    }
    return sum;
}

double lemma31_rhs(const AnalyticFn& f, const AnalyticFn& phi, const Vec& v, const Vec& v_star, double theta,
                   int d) {
    require_angle(theta);
    const Vec r = sub(v, v_star);
    const double rr = dot(r, r, d);
    if (!(rr > 0.0)) throw std::invalid_argument("lemma: v must differ from v_*");

    const double fv = f.value(v), fs = f.value(v_star);
    const Vec gf = f.grad(v), gfs = f.grad(v_star);
    const Vec dphi = sub(phi.grad(v), phi.grad(v_star));
    Vec mob{0, 0, 0};
    for (int c = 0; c < d; ++c) mob[c] = fs * gf[c] - fv * gfs[c];
    // |r|^2 Pi_r dphi, written without dividing by |r|^2
    const double first = 2.0 * dot(mob, transverse(r, dphi, d), d);

    // (div_v - div_{v_*}) of |r|^2 Pi_r (grad phi - grad phi_*), by finite differences.
    auto field = [&](const Vec& a, const Vec& b, int comp) {
        return transverse(sub(a, b), sub(phi.grad(a), phi.grad(b)), d)[comp];
    };
    const double h = 1e-2;
    double div = 0.0;
    for (int c = 0; c < d; ++c) {
        div += d6([&](double s) { Vec a = v; a[c] += s; return field(a, v_star, c); }, h);
        div -= d6([&](double s) { Vec b = v_star; b[c] += s; return field(v, b, c); }, h);
    }
    const double second = fv * fs * div;
    const double pref = theta * theta * sphere_area(d - 2) / (8.0 * (d - 1));
    return pref * (first + second);
}

LemmaCheck lemma31_check(const AnalyticFn& f, const AnalyticFn& phi, const Vec& v, const Vec& v_star,
                         const std::vector<double>& thetas, int d, int p_nodes) {
    if (thetas.size() < 2) throw std::invalid_argument("lemma check needs at least two angles");
    const SphereRule p_rule = sphere_rule(d - 2, p_nodes);
    LemmaCheck out;
    out.thetas = thetas;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double th : thetas) {
        const double l = lemma31_lhs(f, phi, v, v_star, th, p_rule, d);
        const double rr = lemma31_rhs(f, phi, v, v_star, th, d);
        const double e = std::abs(l - rr);
        out.lhs.push_back(l);
        out.rhs.push_back(rr);
        out.errors.push_back(e);
        out.ratios.push_back(e / (th * th));
        const double x = std::log(th), y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(thetas.size());
    out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    out.ratios_decreasing = true;
    // The ladder is ordered from large to small theta.
    for (std::size_t i = 1; i < thetas.size(); ++i)
        if (!(out.ratios[i] < out.ratios[i - 1])) out.ratios_decreasing = false;
    return out;
}

CollisionOutput q_grazing_apply(const Field& f, const KernelSpec& spec, int theta_nodes, int p_nodes) {
    if (!spec.epsilon) throw std::invalid_argument("grazing operator needs a scaled kernel");
    if (theta_nodes < 32) throw std::invalid_argument("grazing operator needs at least 32 theta nodes");
    const int d = f.grid().d;
    std::vector<double> th, w;
    gauss_legendre(theta_nodes, 0.0, 0.5 * *spec.epsilon, th, w);
    const SphereRule p_rule = sphere_rule(d - 2, p_nodes);
    QuartetOperator op(f.grid_ptr(), spec, theta_p_nodes(spec, th, w, p_rule, d), QuartetModel::wave4);
    return op.apply(f, entropy_variable(f, QuartetModel::wave4));
}

ConvergenceReport grazing_convergence(const Field& f, const KernelSpec& base, const std::vector<double>& epsilons,
                                      const GrazingOptions& opt) {
    if (epsilons.empty()) throw std::invalid_argument("grazing convergence needs at least one epsilon");
    const int d = f.grid().d;
    ConvergenceReport rep;
    rep.epsilons = epsilons;
    rep.theta_nodes = opt.theta_nodes;
    rep.p_nodes = d == 2 ? 2 : opt.p_nodes;
    rep.sigma_nodes = opt.sigma_nodes;

    KernelSpec unscaled = base;
    unscaled.epsilon.reset();
    const Field ql = q_landau_apply(f, unscaled).q;
    rep.landau_norm = norm_l2(ql);
    for (double eps : epsilons) {
        if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
        KernelSpec s = base;
        s.epsilon = eps;
        const Field qe = q_grazing_apply(f, s, opt.theta_nodes, opt.p_nodes).q;
        const double diff = norm_l2(axpy(-1.0, ql, qe));
        rep.abs_errors.push_back(diff);
        rep.errors.push_back(rep.landau_norm > 0.0 ? diff / rep.landau_norm : 0.0);
    }
    rep.monotone = true;
    for (std::size_t i = 1; i < rep.errors.size(); ++i) {
        if (!(rep.errors[i] < rep.errors[i - 1])) rep.monotone = false;
        rep.observed_rates.push_back(rep.errors[i] > 0.0 ? std::log2(rep.errors[i - 1] / rep.errors[i]) : 0.0);
    }

    if (opt.check_paths) {
        const SphereRule srule = sphere_rule(d - 1, opt.sigma_nodes);
        const Field a = q4_apply(f, unscaled, srule).q;
        std::vector<double> th, w;
        matched_theta_rule(srule, d, th, w);
        const SphereRule p_rule = d == 2 ? sphere_rule(0, 0) : sphere_rule(1, opt.sigma_nodes);
        QuartetOperator op(f.grid_ptr(), unscaled, theta_p_nodes(unscaled, th, w, p_rule, d), QuartetModel::wave4);
        const Field b = op.apply(f, entropy_variable(f, QuartetModel::wave4)).q;
        const double na = norm_l2(a);
        rep.path_consistency = na > 0.0 ? norm_l2(axpy(-1.0, a, b)) / na : norm_l2(b);
    }
    return rep;
}

Field default_mixture(const GridPtr& grid) {
    const int d = grid->d;
    return Field::from_function(grid, [d](const Vec& v) {
        double p = 0.0, m = 0.0;
        for (int k = 0; k < d; ++k) {
            const double a = k == 0 ? 1.0 : 0.0;
            p += (v[k] - a) * (v[k] - a);
            m += (v[k] + a) * (v[k] + a);
        }
        return 0.7 * std::exp(-p) + 0.3 * std::exp(-0.5 * m) + 1e-6;
    });
}

}  // namespace wkl

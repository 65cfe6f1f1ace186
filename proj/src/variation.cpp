#include "pberg/variation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "affine_solver.hpp"
#include "pberg/parallel.hpp"

namespace pberg {

namespace {

void check_parameter(Complex center, double radius, int m) {
    if (!(radius > 0.0) || !std::isfinite(radius) || !std::isfinite(center.real()) || !std::isfinite(center.imag())) {
        throw ValidationError("parameter disk needs a finite center and positive radius");
    }
    if (m < 1) throw ValidationError("m must be a positive integer");
}

}  // namespace

DomainFamily DomainFamily::hartogs(std::function<double(Complex)> u, std::string u_tag, int m,
                                   Complex parameter_center, double parameter_radius) {
    check_parameter(parameter_center, parameter_radius, m);
    if (!u) throw ValidationError("Hartogs family needs u(t)");
    DomainFamily f;
    f.u_ = std::move(u);
    f.u_tag_ = std::move(u_tag);
    f.m_ = m;
    f.center_ = parameter_center;
    f.radius_ = parameter_radius;
    return f;
}

DomainFamily DomainFamily::product(Domain fiber, int m, Complex parameter_center, double parameter_radius) {
    check_parameter(parameter_center, parameter_radius, m);
    DomainFamily f;
    f.fixed_ = std::move(fiber);
    f.u_tag_ = "product";
    f.m_ = m;
    f.center_ = parameter_center;
    f.radius_ = parameter_radius;
    return f;
}

DomainFamily& DomainFamily::with_weight(FiberWeight phi, std::string tag, bool declared_psh) {
    phi_ = std::move(phi);
    weight_tag_ = std::move(tag);
    weight_psh_ = declared_psh;
    return *this;
}

int DomainFamily::fiber_dim() const noexcept { return fixed_ ? fixed_->dim() : 1; }

double DomainFamily::fiber_radius(Complex t) const {
    if (fixed_) throw ValidationError("fiber radius is defined for Hartogs families only");
    const double u = u_(t);
    if (!std::isfinite(u)) throw ValidationError("u(t) is not finite");
    return std::exp(-u);
}

Domain DomainFamily::fiber(Complex t) const {
    if (fixed_) return *fixed_;
    return Domain::hartogs_fiber(fiber_radius(t));
}

Weight DomainFamily::weight(Complex t) const {
    if (!phi_) return Weight::zero();
    auto phi = phi_;
    return Weight::from([phi, t](const Point& z) { return phi(t, z); });
}

std::function<double(Complex)> hartogs_profile(const std::string& tag) {
    if (tag == "abs2") return [](Complex t) { return std::norm(t); };
    if (tag == "re") return [](Complex t) { return t.real(); };
    if (tag == "mixed") return [](Complex t) { return 0.2 * std::norm(t) + (t * t).real(); };
    if (tag == "neg_abs2") return [](Complex t) { return -std::norm(t); };
    if (tag == "zero") return [](Complex) { return 0.0; };
    throw ValidationError("unknown Hartogs profile '" + tag + "'");
}

DomainFamily::FiberWeight family_weight(const std::string& tag) {
    if (tag == "zero") return {};
    if (tag == "re_tz") return [](Complex t, const Point& z) { return (t * z(0)).real(); };
    if (tag == "abs2_z") return [](Complex, const Point& z) { return z.squaredNorm(); };
    if (tag == "abs2_t") return [](Complex t, const Point&) { return std::norm(t); };
    throw ValidationError("unknown family weight '" + tag + "'");
}

ExtremalResult fiber_kernel(const DomainFamily& family, Complex t, const Point& z, const TruncatedBasis& basis,
                            int resolution, const SolverOptions& opts) {
    if (!family.in_parameter_domain(t)) throw ValidationError("t lies outside the parameter disk");
    if (basis.dim() != family.fiber_dim() || z.size() != family.fiber_dim()) {
        throw ValidationError("basis or point dimension differs from the fiber dimension");
    }
    const Domain fiber = family.fiber(t);
    if (!fiber.contains(z)) throw ValidationError("z is not interior to the fiber");
    const QuadratureRule rule = build_quadrature(fiber, resolution);
    return p_extremal(basis, rule, family.weight(t), family.p(), z, opts);
}

std::optional<double> TabulatedField::operator()(Complex t) const {
    if (nx < 4 || ny < 4 || values.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny)) {
        throw ValidationError("tabulated field needs at least a 4 x 4 grid of values");
    }
    const double x = (t.real() - origin.real()) / spacing;
    const double y = (t.imag() - origin.imag()) / spacing;
    constexpr double slack = 1e-12;
    if (x < -slack || y < -slack || x > nx - 1 + slack || y > ny - 1 + slack) return std::nullopt;

    auto stencil = [](double s, int count, std::array<double, 4>& w) {
        const int first = std::clamp(static_cast<int>(std::floor(s)) - 1, 0, count - 4);
        for (int a = 0; a < 4; ++a) {
            double l = 1.0;
            for (int b = 0; b < 4; ++b) {
                if (b != a) l *= (s - (first + b)) / static_cast<double>(a - b);
            }
            w[static_cast<std::size_t>(a)] = l;
        }
        return first;
    };
    std::array<double, 4> wx{}, wy{};
    const int ix = stencil(x, nx, wx);
    const int iy = stencil(y, ny, wy);
    double sum = 0.0;
    for (int b = 0; b < 4; ++b) {
        for (int a = 0; a < 4; ++a) {
            const double v = values[static_cast<std::size_t>((iy + b) * nx + ix + a)];
            if (std::isnan(v)) return std::nullopt;
            if (v == -std::numeric_limits<double>::infinity()) return v;
            sum += wx[static_cast<std::size_t>(a)] * wy[static_cast<std::size_t>(b)] * v;
        }
    }
    return sum;
}

TabulatedField tabulate(const std::function<double(Complex)>& fn, Complex origin, double spacing, int nx, int ny) {
    if (!(spacing > 0.0) || nx < 4 || ny < 4) throw ValidationError("field grid needs spacing > 0 and 4 x 4 nodes");
    TabulatedField f{origin, spacing, nx, ny, {}};
    f.values.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0.0);
    parallel_for(f.values.size(), [&](std::size_t k) {
        const int i = static_cast<int>(k % static_cast<std::size_t>(nx));
        const int j = static_cast<int>(k / static_cast<std::size_t>(nx));
        f.values[k] = fn(f.node(i, j));
    });
    return f;
}

TabulatedField tabulate_around(const std::function<double(Complex)>& fn, Complex center, double spacing, int half) {
    const int n = 2 * half + 1;
    return tabulate(fn, center - spacing * Complex(half, half), spacing, n, n);
}

ProbeReport psh_probe(const TabulatedField& field, const std::vector<Complex>& centers,
                      const std::vector<double>& radii, double tol, int angles) {
    if (!(tol >= 0.0)) throw ValidationError("probe tolerance must be non-negative");
    if (angles < 64) throw ValidationError("probe circles need at least 64 angles");
    ProbeReport out;
    out.tol = tol;
    out.min_margin = std::numeric_limits<double>::infinity();
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (const Complex c : centers) {
        for (const double r : radii) {
            if (!(r > 0.0)) throw ValidationError("probe radii must be positive");
            const auto centre_value = field(c);
            bool inside = centre_value.has_value();
            CompensatedSum sum;
            bool minus_inf = false;
            for (int k = 0; k < angles && inside; ++k) {
                const auto v = field(c + std::polar(r, 2.0 * std::numbers::pi * k / angles));
                if (!v) {
                    inside = false;
                } else if (*v == -inf) {
                    minus_inf = true;
                } else {
                    sum.add(*v);
                }
            }
            if (!inside) {
                ++out.skipped;
                continue;
            }
            ProbeRecord rec;
            rec.center = c;
            rec.radius = r;
            rec.field_center = *centre_value;
            rec.circle_mean = minus_inf ? -inf : sum.value() / angles;
            if (rec.field_center == -inf) {
                rec.margin = inf;
            } else {
                rec.margin = rec.circle_mean - rec.field_center;
            }
            rec.violated = rec.margin < -tol;
            out.violations += rec.violated ? 1 : 0;
            out.min_margin = std::min(out.min_margin, rec.margin);
            out.probes.push_back(rec);
        }
    }
    if (out.probes.empty()) out.min_margin = 0.0;
    return out;
}

double default_probe_tolerance(const QuadratureRule& rule, const SolverOptions& opts) {
    const double solver_tol = opts.tol > 0.0 ? opts.tol : default_tolerance(rule);
    return 3.0 * (rule.est_error + solver_tol);
}

HoloFunctional HoloFunctional::delta(const Point& z, Complex coefficient) {
    HoloFunctional xi;
    xi.atoms.push_back({[z](Complex) { return z; }, [coefficient](Complex) { return coefficient; }});
    return xi;
}

Eigen::VectorXcd HoloFunctional::coefficients(const TruncatedBasis& basis, Complex t) const {
    Eigen::VectorXcd ell = Eigen::VectorXcd::Zero(basis.size());
    for (const auto& atom : atoms) {
        const Point z = atom.point(t);
        if (z.size() != basis.dim()) throw ValidationError("functional atom has the wrong dimension");
        ell += atom.coefficient(t) * evaluate_basis(basis, z, false).values;
    }
    return ell;
}

DualNormResult dual_norm(const DomainFamily& family, const HoloFunctional& xi, Complex t,
                         const TruncatedBasis& basis, int resolution, const SolverOptions& opts) {
    if (!family.in_parameter_domain(t)) throw ValidationError("t lies outside the parameter disk");
    if (basis.dim() != family.fiber_dim()) throw ValidationError("basis dimension differs from the fiber dimension");
    const Domain fiber = family.fiber(t);
    for (const auto& atom : xi.atoms) {
        if (!fiber.contains(atom.point(t))) throw ValidationError("functional atom lies outside the fiber");
    }
    const QuadratureRule rule = build_quadrature(fiber, resolution);
    DualNormResult out;
    out.tol = opts.tol > 0.0 ? opts.tol : default_tolerance(rule);
    const Eigen::VectorXcd ell = xi.coefficients(basis, t);
    if (xi.empty() || ell.isZero(0.0)) {
        out.method = "zero";
        return out;
    }
    if (family.m() == 1) {
        out.method = "gram";
        out.value = gram_functional_norm(basis, rule, family.weight(t), ell);
        return out;
    }
    const ExtremalResult r = functional_extremal(basis, rule, family.weight(t), family.p(), ell, opts);
    out.method = "extremal";
    out.value = std::sqrt(r.kernel_value);
    out.converged = r.converged;
    return out;
}

namespace {

// Product rule over the total space: parameter-disk nodes times the fiber rule at each t.
struct JointRule {
    Eigen::VectorXcd t;      // t - t0 per node
    Eigen::MatrixXcd z;      // fiber coordinates per node
    Eigen::VectorXd omega;   // w_t w_z exp(-phi)
};

JointRule joint_rule(const DomainFamily& family, int resolution) {
    const Complex t0 = family.parameter_center();
    const QuadratureRule t_rule = build_quadrature(Domain::disk(t0, family.parameter_radius()), resolution);
    std::vector<QuadratureRule> fibers(static_cast<std::size_t>(t_rule.size()));
    std::optional<QuadratureRule> shared;
    if (!family.is_hartogs()) shared = build_quadrature(family.fiber(t0), resolution);
    Eigen::Index total = 0;
    for (Eigen::Index i = 0; i < t_rule.size(); ++i) {
        auto& f = fibers[static_cast<std::size_t>(i)];
        f = shared ? *shared : build_quadrature(family.fiber(t_rule.nodes(i, 0)), resolution);
        total += f.size();
    }
    JointRule out;
    const int n = family.fiber_dim();
    out.t.resize(total);
    out.z.resize(total, n);
    out.omega.resize(total);
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < t_rule.size(); ++i) {
        const Complex t = t_rule.nodes(i, 0);
        const auto& f = fibers[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < f.size(); ++j, ++row) {
            const double phi = family.phi(t, f.node(j));
            if (!std::isfinite(phi)) throw ValidationError("weight is not finite on a joint quadrature node");
            out.t(row) = t - t0;
            out.z.row(row) = f.nodes.row(j);
            out.omega(row) = t_rule.weights(i) * f.weights(j) * std::exp(-phi);
        }
    }
    return out;
}

Eigen::VectorXcd joint_values(const JointRule& rule, const Eigen::MatrixXcd& coeffs, const TruncatedBasis& z_basis) {
    const Eigen::MatrixXcd design = z_basis.design(rule.z);
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(rule.t.size());
    Eigen::VectorXcd power = Eigen::VectorXcd::Ones(rule.t.size());
    for (Eigen::Index a = 0; a < coeffs.rows(); ++a) {
        out += power.cwiseProduct(design * coeffs.row(a).transpose());
        power = power.cwiseProduct(rule.t);
    }
    return out;
}

}  // namespace

ExtensionResult minimal_extension(const DomainFamily& family, const HoloFunction& u, const ExtensionOptions& opts) {
    if (opts.t_degree < 0 || opts.z_degree < 0) throw ValidationError("extension degrees must be non-negative");
    if (u.dim() != family.fiber_dim()) throw ValidationError("u lives in a different dimension than the fiber");
    if (u.basis().degree() > opts.z_degree) {
        const Eigen::Index keep = TruncatedBasis(u.dim(), opts.z_degree).size();
        if (!u.coeffs().tail(u.coeffs().size() - keep).isZero(0.0)) {
            throw ValidationError("u has degree above the fiber degree of the joint basis; constraints infeasible");
        }
    }
    const TruncatedBasis z_basis(family.fiber_dim(), opts.z_degree);
    const Eigen::VectorXcd u_coeffs = u.basis().degree() > opts.z_degree
                                          ? Eigen::VectorXcd(u.coeffs().head(z_basis.size()))
                                          : u.lifted(z_basis).coeffs();
    const double p = family.p();
    const Complex t0 = family.parameter_center();

    const QuadratureRule fiber_rule = build_quadrature(family.fiber(t0), opts.resolution);
    const BoundRule fiber_bound = bind_weight(fiber_rule, family.weight(t0));
    ExtensionResult out;
    out.z_basis = z_basis;
    out.t_degree = opts.t_degree;
    out.tol = opts.solver.tol > 0.0 ? opts.solver.tol : default_tolerance(fiber_rule);
    out.fiber_value = detail::weighted_power_sum(z_basis.design(fiber_bound.nodes) * u_coeffs, fiber_bound.omega, p);
    if (!(out.fiber_value > 0.0)) throw ValidationError("u has zero fiber norm");

    const JointRule rule = joint_rule(family, opts.resolution);
    const Eigen::MatrixXcd design = z_basis.design(rule.z);
    const Eigen::VectorXcd base = design * u_coeffs;
    const Eigen::Index kz = z_basis.size();
    Eigen::MatrixXcd a(rule.t.size(), opts.t_degree * kz);
    Eigen::VectorXcd power = rule.t;
    for (int deg = 1; deg <= opts.t_degree; ++deg) {
        a.middleCols((deg - 1) * kz, kz) = power.asDiagonal() * design;
        power = power.cwiseProduct(rule.t);
    }
    const detail::DenseModel model(std::move(a), base);
    const auto sol = detail::minimize_pnorm(model, rule.omega, p, opts.solver, out.tol);

    out.coeffs.resize(opts.t_degree + 1, kz);
    out.coeffs.row(0) = u_coeffs.transpose();
    for (int deg = 1; deg <= opts.t_degree; ++deg) {
        out.coeffs.row(deg) = sol.y.segment((deg - 1) * kz, kz).transpose();
    }
    out.total = sol.objective;
    out.ratio = out.total / (std::numbers::pi * out.fiber_value);
    out.trivial_ratio = detail::weighted_power_sum(base, rule.omega, p) / (std::numbers::pi * out.fiber_value);
    out.converged = sol.converged;
    out.stationarity = sol.stationarity;
    return out;
}

double extension_total(const DomainFamily& family, const ExtensionResult& result, int resolution) {
    const JointRule rule = joint_rule(family, resolution);
    return detail::weighted_power_sum(joint_values(rule, result.coeffs, result.z_basis), rule.omega, family.p());
}

}  // namespace pberg

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pberg/basis.hpp"
#include "pberg/domains.hpp"
#include "pberg/extremal.hpp"

namespace pberg {

/// A family of weighted domains Omega_t over a parameter disk, with the m of the
/// fiber spaces E_m (norm (int |f|^{2/m} e^{-phi})^{m/2}).
class DomainFamily {
public:
    using FiberWeight = std::function<double(Complex, const Point&)>;

    /// Omega_t = {|z| < exp(-u(t))} in C.
    static DomainFamily hartogs(std::function<double(Complex)> u, std::string u_tag, int m,
                                Complex parameter_center = {0.0, 0.0}, double parameter_radius = 1.0);
    /// Omega_t = fiber for every t.
    static DomainFamily product(Domain fiber, int m, Complex parameter_center = {0.0, 0.0},
                                double parameter_radius = 1.0);

    /// Replaces the weight phi(t, z); the default is phi = 0.
    DomainFamily& with_weight(FiberWeight phi, std::string tag, bool declared_psh);

    int m() const noexcept { return m_; }
    double p() const noexcept { return 2.0 / m_; }
    int fiber_dim() const noexcept;
    bool is_hartogs() const noexcept { return !fixed_.has_value(); }
    const std::string& u_tag() const noexcept { return u_tag_; }
    const std::string& weight_tag() const noexcept { return weight_tag_; }
    bool weight_declared_psh() const noexcept { return weight_psh_; }
    Complex parameter_center() const noexcept { return center_; }
    double parameter_radius() const noexcept { return radius_; }
    bool in_parameter_domain(Complex t) const noexcept { return std::abs(t - center_) < radius_; }

    /// exp(-u(t)) for Hartogs families.
    double fiber_radius(Complex t) const;
    Domain fiber(Complex t) const;
    Weight weight(Complex t) const;
    bool weight_is_zero() const noexcept { return !phi_; }
    double phi(Complex t, const Point& z) const { return phi_ ? phi_(t, z) : 0.0; }

private:
    DomainFamily() = default;

    std::function<double(Complex)> u_;
    std::string u_tag_;
    std::optional<Domain> fixed_;
    FiberWeight phi_;
    std::string weight_tag_ = "zero";
    bool weight_psh_ = true;
    int m_ = 1;
    Complex center_{0.0, 0.0};
    double radius_ = 1.0;
};

/// Named u(t) for Hartogs families: abs2 |t|^2, re Re t, mixed 0.2|t|^2 + Re(t^2),
/// neg_abs2 -|t|^2, zero.
std::function<double(Complex)> hartogs_profile(const std::string& tag);

/// Named phi(t, z): zero, re_tz Re(t z_1), abs2_z |z|^2, abs2_t |t|^2.
DomainFamily::FiberWeight family_weight(const std::string& tag);

/// K_{m,t}(z): p_extremal on the fiber with p = 2/m and weight phi_t.
ExtremalResult fiber_kernel(const DomainFamily& family, Complex t, const Point& z, const TruncatedBasis& basis,
                            int resolution, const SolverOptions& opts = {});

/// A real field on a uniform grid origin + h (i + j sqrt(-1)), i < nx, j < ny, read back by
/// local bicubic Lagrange interpolation. Values may be -inf; NaN marks a node
/// outside the field's domain and makes its stencil unreadable.
struct TabulatedField {
    Complex origin{0.0, 0.0};
    double spacing = 1.0;
    int nx = 0;
    int ny = 0;
    std::vector<double> values;  // index j * nx + i

    Complex node(int i, int j) const { return origin + spacing * Complex(i, j); }
    /// nullopt outside the grid's hull or when the stencil touches a NaN.
    std::optional<double> operator()(Complex t) const;
};

/// Evaluates fn on an nx x ny grid in parallel.
TabulatedField tabulate(const std::function<double(Complex)>& fn, Complex origin, double spacing, int nx, int ny);

/// Square grid with `half` nodes on each side of center: (2 half + 1)^2 nodes.
TabulatedField tabulate_around(const std::function<double(Complex)>& fn, Complex center, double spacing, int half);

struct ProbeRecord {
    Complex center;
    double radius = 0.0;
    double field_center = 0.0;
    double circle_mean = 0.0;
    double margin = 0.0;  // circle_mean - field_center
    bool violated = false;
};

struct ProbeReport {
    std::vector<ProbeRecord> probes;
    int violations = 0;
    int skipped = 0;
    double tol = 0.0;
    double min_margin = 0.0;
};

/// Sub-mean-value test: a probe is violated when field(c) > mean over the circle + tol.
ProbeReport psh_probe(const TabulatedField& field, const std::vector<Complex>& centers,
                      const std::vector<double>& radii, double tol, int angles = 128);

/// 3 (est_error + solver tol), the default probe tolerance for log-kernel fields.
double default_probe_tolerance(const QuadratureRule& rule, const SolverOptions& opts = {});

/// Finite atomic functional f -> sum_k c_k(t) f(z_k(t)).
struct HoloFunctional {
    struct Atom {
        std::function<Point(Complex)> point;
        std::function<Complex(Complex)> coefficient;
    };
    std::vector<Atom> atoms;

    static HoloFunctional delta(const Point& z, Complex coefficient = {1.0, 0.0});
    bool empty() const noexcept { return atoms.empty(); }
    /// Coefficients of the functional on the basis at parameter t.
    Eigen::VectorXcd coefficients(const TruncatedBasis& basis, Complex t) const;
};

struct DualNormResult {
    double value = 0.0;
    bool converged = true;
    std::string method;  // "zero", "gram", "extremal"
    double tol = 0.0;
};

/// sup |xi_t(f)| over truncated fiber functions with |f|_m <= 1.
DualNormResult dual_norm(const DomainFamily& family, const HoloFunctional& xi, Complex t,
                         const TruncatedBasis& basis, int resolution, const SolverOptions& opts = {});

struct ExtensionResult {
    /// U(t, z) = sum_{a, k} coeffs(a, k) t^a e_k(z), e_k from z_basis.
    Eigen::MatrixXcd coeffs;
    TruncatedBasis z_basis{1, 0};
    int t_degree = 0;
    double total = 0.0;
    double fiber_value = 0.0;
    double ratio = 0.0;          // total / (pi * fiber_value)
    double trivial_ratio = 0.0;  // for U(t, z) = u(z)
    bool converged = true;
    double stationarity = 0.0;
    double tol = 0.0;
};

struct ExtensionOptions {
    int t_degree = 4;
    int z_degree = 4;
    int resolution = 12;  // for both the parameter disk and every fiber
    SolverOptions solver{};
};

/// Minimizes int |U|^{2/m} e^{-phi} over the total space subject to U(t0, .) = u, t0 the
/// parameter center.
ExtensionResult minimal_extension(const DomainFamily& family, const HoloFunction& u,
                                  const ExtensionOptions& opts = {});

/// int |U|^{2/m} e^{-phi} for the expansion in `result`, on the same product rule.
double extension_total(const DomainFamily& family, const ExtensionResult& result, int resolution);

}  // namespace pberg

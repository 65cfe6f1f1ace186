#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pberg/basis.hpp"
#include "pberg/domains.hpp"

namespace pberg {

/// A biholomorphism f : Omega_1 -> Omega_2 with its holomorphic Jacobian determinant.
struct Biholomorphism {
    int dim = 1;
    std::function<Point(const Point&)> map;
    std::function<Complex(const Point&)> jacobian;
    std::string name;

    static Biholomorphism identity(int dim);
    static Biholomorphism scaling(int dim, Complex factor);
    /// z -> (z - a) / (1 - conj(a) z), an automorphism of the unit disk.
    static Biholomorphism mobius(Complex a);
    /// z -> U z for a unitary U; an automorphism of the unit ball.
    static Biholomorphism unitary(const Eigen::MatrixXcd& u);

    /// this after inner: z -> map(inner.map(z)).
    Biholomorphism after(const Biholomorphism& inner) const;
};

enum class IsometryDirection { pullback, forward };

/// Matrix of a linear map between truncated A^p coefficient spaces.
/// pullback: source is the basis on Omega_2, target the basis on Omega_1 (psi -> (psi o f) J_f^{2/p}).
/// forward: source is the basis on Omega_1, target the basis on Omega_2.
struct IsometryOperator {
    Eigen::MatrixXcd matrix;  // target.size() x source.size()
    double p = 2.0;
    TruncatedBasis source_basis{1, 0};
    TruncatedBasis target_basis{1, 0};
    IsometryDirection direction = IsometryDirection::pullback;
    double projection_residual = 0.0;

    HoloFunction apply(const HoloFunction& psi) const;
};

struct PullbackOptions {
    double residual_cap = 1e-3;
};

/// Column j is the projection of (e_j o f) J_f^{2/p} onto target_basis over rule_1.
/// Non-integer exponents use the principal branch at the node nearest the domain
/// center, continued along a spanning tree of the node set.
IsometryOperator pullback_operator(const Biholomorphism& f, double p, const TruncatedBasis& source_basis,
                                   const TruncatedBasis& target_basis, const Domain& omega_1,
                                   const QuadratureRule& rule_1, const PullbackOptions& opts = {});

/// J^{2/p} on the rule nodes with a continuous branch; throws BranchError on winding.
Eigen::VectorXcd jacobian_power(const Eigen::VectorXcd& jacobian, double exponent, const QuadratureRule& rule,
                                const Domain& domain);

struct BatteryReport {
    double max_defect = 0.0;
    double mean_defect = 0.0;
    int functions = 0;
};

/// Relative defect | ||T psi||_{p,Omega_1} - ||psi||_{p,Omega_2} | / ||psi|| over the first
/// `count` source basis elements of a pullback operator.
BatteryReport isometry_battery(const IsometryOperator& op, const QuadratureRule& rule_1,
                               const QuadratureRule& rule_2, int count);

/// F = (phi_1 / phi_0, ..., phi_n / phi_0); points with |phi_0| <= threshold are unusable.
struct RationalMap {
    std::vector<HoloFunction> numerators;
    HoloFunction denominator = HoloFunction::zero(TruncatedBasis(1, 0));
    double exclusion_threshold = 0.0;

    int dim() const noexcept { return static_cast<int>(numerators.size()); }
    bool usable(const Point& z) const;
    std::optional<Point> operator()(const Point& z) const;
    /// Holomorphic Jacobian determinant by the quotient rule.
    std::optional<Complex> jacobian(const Point& z) const;
};

struct ReconstructOptions {
    double tau = 0.0;               // absolute threshold; 0 derives it from tau_relative
    double tau_relative = 1e-8;     // times max |phi_0| over the reference points
    double condition_cap = 1e10;    // for inverting forward operators
};

struct Reconstruction {
    RationalMap map;
    double condition = 1.0;
    double solve_residual = 0.0;
};

/// phi_0 = T^{-1}(1), phi_j = T^{-1}(w_j). A pullback operator stores T^{-1} directly;
/// a forward operator is inverted by least squares with a conditioning check.
Reconstruction reconstruct_map(const IsometryOperator& op, const std::vector<Point>& reference_points,
                               const ReconstructOptions& opts = {});

struct JacobianReport {
    double max_residual = 0.0;
    double mean_residual = 0.0;
    int evaluated = 0;
    int excluded = 0;
    int battery_size = 0;
    double solve_residual = 0.0;  // worst relative residual computing T phi from a pullback matrix
};

/// max/mean of | |T phi(F(z))| |J_F(z)|^{2/p} - |phi(z)| | / (|phi(z)| + delta) over points x functions,
/// delta = delta_relative * max |phi| over the points. Test functions live on Omega_1.
JacobianReport verify_jacobian_relation(const IsometryOperator& op, const RationalMap& f, double p,
                                        const std::vector<Point>& points,
                                        const std::vector<HoloFunction>& test_functions,
                                        double delta_relative = 1e-6);

/// Images of the first `count` source basis elements under a pullback operator.
std::vector<HoloFunction> column_battery(const IsometryOperator& op, int count);

/// Points of the closed disk {|z - center| <= radius} on `rings` circles of `per_ring` points,
/// optionally preceded by the center.
std::vector<Point> disk_grid(Complex center, double radius, int rings, int per_ring, bool include_center = true);

}  // namespace pberg

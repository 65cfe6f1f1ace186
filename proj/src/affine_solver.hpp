#pragma once

// Minimization of sum_i omega_i |f_i|^p over an affine family of node-value vectors
// f = b + A y. Shared by the kernel, dual-norm and extension solvers.

#include <memory>

#include <Eigen/Dense>

#include "pberg/extremal.hpp"

namespace pberg::detail {

/// The affine family f = b + A y, accessed only through the products the
/// Newton/IRLS iteration needs.
class AffineModel {
public:
    virtual ~AffineModel() = default;
    virtual Eigen::Index unknowns() const = 0;
    virtual Eigen::Index nodes() const = 0;
    /// b + A y
    virtual Eigen::VectorXcd values(const Eigen::VectorXcd& y) const = 0;
    /// A^H v
    virtual Eigen::VectorXcd adjoint(const Eigen::VectorXcd& v) const = 0;
    /// A^H diag(gamma) A
    virtual Eigen::MatrixXcd gram(const Eigen::VectorXd& gamma) const = 0;
    /// A^H diag(beta) conj(A)
    virtual Eigen::MatrixXcd cosym(const Eigen::VectorXcd& beta) const = 0;
};

class DenseModel final : public AffineModel {
public:
    DenseModel(Eigen::MatrixXcd a, Eigen::VectorXcd b) : a_(std::move(a)), b_(std::move(b)) {}
    Eigen::Index unknowns() const override { return a_.cols(); }
    Eigen::Index nodes() const override { return a_.rows(); }
    Eigen::VectorXcd values(const Eigen::VectorXcd& y) const override;
    Eigen::VectorXcd adjoint(const Eigen::VectorXcd& v) const override;
    Eigen::MatrixXcd gram(const Eigen::VectorXd& gamma) const override;
    Eigen::MatrixXcd cosym(const Eigen::VectorXcd& beta) const override;

private:
    Eigen::MatrixXcd a_;
    Eigen::VectorXcd b_;
};

/// Hermitian Householder reflector H = I - tau v v^H with H x = alpha e_0.
/// Columns 1.. of H span the orthogonal complement of x.
struct Reflector {
    Eigen::VectorXcd v;
    double tau = 0.0;

    static Reflector annihilating(const Eigen::VectorXcd& x);
    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;                // H x
    Eigen::MatrixXcd sandwich(const Eigen::MatrixXcd& m) const;              // H M H
    Eigen::MatrixXcd sandwich_conj(const Eigen::MatrixXcd& m) const;         // H M conj(H)
};

/// Monomials z^k (k <= degree) scaled by precond_k on a ring-major polar rule centered
/// at the origin, restricted to the affine set {c = c_p + H [0; y]}. All node sums
/// are taken ring by ring with FFTs.
class PolarModel final : public AffineModel {
public:
    PolarModel(const PolarLayout& layout, int degree, Eigen::VectorXd precond, Eigen::VectorXcd particular,
               Reflector reflector);
    Eigen::Index unknowns() const override { return degree_; }
    Eigen::Index nodes() const override;
    Eigen::VectorXcd values(const Eigen::VectorXcd& y) const override;
    Eigen::VectorXcd adjoint(const Eigen::VectorXcd& v) const override;
    Eigen::MatrixXcd gram(const Eigen::VectorXd& gamma) const override;
    Eigen::MatrixXcd cosym(const Eigen::VectorXcd& beta) const override;

    /// Full preconditioned coefficient vector for reduced coordinates y.
    Eigen::VectorXcd full(const Eigen::VectorXcd& y) const;
    /// Node values of the full preconditioned coefficient vector c.
    Eigen::VectorXcd evaluate_full(const Eigen::VectorXcd& c) const;

    /// Weighted squared norms sum_i omega_i |z_i^k|^2 for k = 0..degree.
    static Eigen::VectorXd monomial_norms2(const PolarLayout& layout, const Eigen::VectorXd& omega, int degree);

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    int degree_;
};

struct AffineSolution {
    Eigen::VectorXcd y;
    double objective = 0.0;  // unsmoothed sum omega |f|^p
    double stationarity = 0.0;
    int iterations = 0;
    bool converged = false;
    double spread = 0.0;
};

AffineSolution minimize_pnorm(const AffineModel& model, const Eigen::VectorXd& omega, double p,
                              const SolverOptions& opts, double tol);

/// sum omega |f|^p with compensated accumulation.
double weighted_power_sum(const Eigen::VectorXcd& f, const Eigen::VectorXd& omega, double p);

}  // namespace pberg::detail

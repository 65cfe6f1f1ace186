#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pberg/basis.hpp"
#include "pberg/domains.hpp"

namespace pberg {

/// Plurisubharmonic weight phi; integrands carry exp(-phi).
struct Weight {
    std::function<double(const Point&)> phi;

    static Weight zero() { return Weight{}; }
    static Weight from(std::function<double(const Point&)> fn) { return Weight{std::move(fn)}; }
    bool is_zero() const noexcept { return !phi; }
};

/// Rule nodes with the weight folded in: omega_i = w_i * exp(-phi(node_i)).
/// Nodes where phi = -inf are dropped; any other non-finite phi is rejected.
struct BoundRule {
    Eigen::MatrixXcd nodes;
    Eigen::VectorXd omega;
    std::optional<PolarLayout> polar;
    Eigen::Index dropped = 0;
    double est_error = 0.0;
};

BoundRule bind_weight(const QuadratureRule& rule, const Weight& weight);

enum class SolverPath { automatic, dense, polar };

struct SolverOptions {
    double tol = 0.0;  // 0 selects max(1e-8, 10 * rule.est_error)
    std::vector<double> smoothing{1e-2, 1e-4, 1e-6, 1e-8, 1e-10};
    int max_iterations = 2000;
    int starts = 8;  // used for p < 1
    std::uint64_t seed = 0;
    double condition_cap = 1e13;
    SolverPath path = SolverPath::automatic;
};

double default_tolerance(const QuadratureRule& rule);

struct ExtremalResult {
    double kernel_value = 0.0;
    HoloFunction extremal;
    int iterations = 0;
    bool converged = false;
    double stationarity = 0.0;
    int degree = 0;
    double tol = 0.0;
    double start_spread = 0.0;  // relative spread of kernel values over multi-starts
    std::string path;           // "dense" or "polar"
};

/// (sum_k w_k |f(x_k)|^p exp(-phi(x_k)))^{1/p}
double pnorm(const HoloFunction& f, double p, const QuadratureRule& rule, const Weight& weight);

/// Reproducing-kernel diagonal k(z)^* G^{-1} k(z) of the truncated weighted L^2 space.
double gram_kernel(const TruncatedBasis& basis, const QuadratureRule& rule, const Weight& weight, const Point& z);

/// Norm of the coefficient functional f -> sum_k ell_k c_k against the weighted L^2 norm.
double gram_functional_norm(const TruncatedBasis& basis, const QuadratureRule& rule, const Weight& weight,
                            const Eigen::VectorXcd& ell);

/// Minimizes the weighted p-norm over the truncated space subject to ell(f) = 1, where
/// ell(f) = sum_k ell_k c_k. kernel_value is the squared norm of the functional,
/// ||f*||_p^{-2}.
ExtremalResult functional_extremal(const TruncatedBasis& basis, const QuadratureRule& rule, const Weight& weight,
                                   double p, const Eigen::VectorXcd& ell, const SolverOptions& opts = {});

/// p-Bergman kernel B_{Omega,p}(z) as the constrained minimum with f(z) = 1.
ExtremalResult p_extremal(const TruncatedBasis& basis, const QuadratureRule& rule, const Weight& weight, double p,
                          const Point& z, const SolverOptions& opts = {});

struct ProfilePoint {
    Point z;
    ExtremalResult result;
    bool increased = false;  // strictly above the previous point's value
};

struct KernelProfile {
    std::vector<ProfilePoint> points;
    bool strictly_increasing = true;
};

KernelProfile kernel_profile(const Domain& domain, double p, const std::vector<Point>& path,
                             const TruncatedBasis& basis, const QuadratureRule& rule,
                             const Weight& weight = Weight::zero(), const SolverOptions& opts = {});

}  // namespace pberg

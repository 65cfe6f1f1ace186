#include "pberg/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "affine_solver.hpp"

namespace pberg {

BoundRule bind_weight(const QuadratureRule& rule, const Weight& weight) {
    BoundRule out;
    out.est_error = rule.est_error;
    if (weight.is_zero()) {
        out.nodes = rule.nodes;
        out.omega = rule.weights;
        out.polar = rule.polar;
        return out;
    }
    std::vector<Eigen::Index> keep;
    std::vector<double> omega;
    keep.reserve(static_cast<std::size_t>(rule.size()));
    for (Eigen::Index i = 0; i < rule.size(); ++i) {
        const double phi = weight.phi(rule.node(i));
        if (phi == -std::numeric_limits<double>::infinity()) {
            ++out.dropped;
            continue;
        }
        if (!std::isfinite(phi)) throw ValidationError("weight is not finite on a quadrature node");
        keep.push_back(i);
        omega.push_back(rule.weights(i) * std::exp(-phi));
    }
    if (keep.empty()) throw ValidationError("weight is -inf on every quadrature node");
    out.nodes.resize(static_cast<Eigen::Index>(keep.size()), rule.dim());
    out.omega.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.nodes.row(static_cast<Eigen::Index>(k)) = rule.nodes.row(keep[k]);
        out.omega(static_cast<Eigen::Index>(k)) = omega[k];
    }
    if (out.dropped == 0) out.polar = rule.polar;
    return out;
}

double default_tolerance(const QuadratureRule& rule) { return std::max(1e-8, 10.0 * rule.est_error); }

double pnorm(const HoloFunction& f, double p, const QuadratureRule& rule, const Weight& weight) {
    if (!(p > 0.0)) throw ValidationError("p must be positive");
    const BoundRule bound = bind_weight(rule, weight);
    return std::pow(detail::weighted_power_sum(f.values(bound.nodes), bound.omega, p), 1.0 / p);
}

namespace {

// R^{-T} P^T ell: coordinates of the functional against the weighted-orthonormal basis.
Eigen::VectorXcd orthonormal_functional(const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd>& qr,
                                        const Eigen::VectorXcd& ell) {
    const Eigen::Index K = qr.cols();
    const Eigen::VectorXcd permuted = qr.colsPermutation().transpose() * ell;
    const Eigen::MatrixXcd r = qr.matrixQR().topLeftCorner(K, K).triangularView<Eigen::Upper>();
    return r.transpose().triangularView<Eigen::Lower>().solve(permuted);
}

void check_inputs(const TruncatedBasis& basis, const QuadratureRule& rule, const Eigen::VectorXcd& ell) {
    if (basis.dim() != rule.dim()) throw ValidationError("basis and quadrature dimensions differ");
    if (ell.size() != basis.size()) throw ValidationError("functional length does not match basis size");
}

}  // namespace

double gram_functional_norm(const TruncatedBasis& basis, const QuadratureRule& rule, const Weight& weight,
                            const Eigen::VectorXcd& ell) {
    check_inputs(basis, rule, ell);
    if (ell.isZero(0.0)) return 0.0;
    const BoundRule bound = bind_weight(rule, weight);
    const WeightedLeastSquares ls(basis.design(bound.nodes), bound.omega);
    return orthonormal_functional(ls.qr(), ell).norm();
}

double gram_kernel(const TruncatedBasis& basis, const QuadratureRule& rule, const Weight& weight, const Point& z) {
    const double n = gram_functional_norm(basis, rule, weight, evaluate_basis(basis, z, false).values);
    return n * n;
}

ExtremalResult functional_extremal(const TruncatedBasis& basis, const QuadratureRule& rule, const Weight& weight,
                                   double p, const Eigen::VectorXcd& ell, const SolverOptions& opts) {
    if (!(p > 0.0) || !std::isfinite(p)) throw ValidationError("p must be positive and finite");
    check_inputs(basis, rule, ell);
    const BoundRule bound = bind_weight(rule, weight);
    const double tol = opts.tol > 0.0 ? opts.tol : default_tolerance(rule);
    const Eigen::Index K = basis.size();

    const bool polar_ok = bound.polar.has_value() && basis.dim() == 1 && std::abs(bound.polar->center) == 0.0;
    if (opts.path == SolverPath::polar && !polar_ok) {
        throw ValidationError("polar solver path needs an origin-centered polar rule in one variable");
    }
    const bool use_polar = polar_ok && opts.path != SolverPath::dense;

    ExtremalResult res{0.0, HoloFunction::zero(basis), 0, false, 0.0, 0, 0.0, 0.0, {}};
    res.degree = basis.degree();
    res.tol = tol;
    Eigen::VectorXcd coeffs;
    double objective = 0.0;

    if (use_polar) {
        res.path = "polar";
        const Eigen::VectorXd norms2 = detail::PolarModel::monomial_norms2(*bound.polar, bound.omega, basis.degree());
        if (!(norms2.array() > 0.0).all()) {
            throw ConditioningError("monomial has zero weighted norm on the rule", std::numeric_limits<double>::infinity());
        }
        const Eigen::VectorXd precond = norms2.cwiseSqrt().cwiseInverse();
        const Eigen::VectorXcd ell_p = ell.cwiseProduct(precond.cast<Complex>());
        const Eigen::VectorXcd x = ell_p.conjugate();
        const Eigen::VectorXcd particular = x / x.squaredNorm();
        const detail::PolarModel model(*bound.polar, basis.degree(), precond, particular,
                                       detail::Reflector::annihilating(x));
        const auto sol = detail::minimize_pnorm(model, bound.omega, p, opts, tol);
        Eigen::VectorXcd cp = model.full(sol.y);
        const Complex scale = (ell_p.array() * cp.array()).sum();
        cp /= scale;
        coeffs = cp.cwiseProduct(precond.cast<Complex>());
        objective = detail::weighted_power_sum(model.evaluate_full(cp), bound.omega, p);
        res.iterations = sol.iterations;
        res.stationarity = sol.stationarity;
        res.start_spread = sol.spread;
        res.converged = sol.converged;
    } else {
        res.path = "dense";
        const Eigen::MatrixXcd design = basis.design(bound.nodes);
        const WeightedLeastSquares ls(design, bound.omega, opts.condition_cap);
        const auto& qr = ls.qr();
        const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(design.rows(), K);
        const Eigen::MatrixXcd a_orth = ls.sqrt_weights().cwiseInverse().cast<Complex>().asDiagonal() * q;
        const Eigen::VectorXcd ell_p = orthonormal_functional(qr, ell);
        const Eigen::VectorXcd x = ell_p.conjugate();
        const Eigen::VectorXcd particular = x / x.squaredNorm();
        const auto refl = detail::Reflector::annihilating(x);
        Eigen::MatrixXcd a_red = a_orth - refl.tau * (a_orth * refl.v) * refl.v.adjoint();
        const detail::DenseModel model(a_red.rightCols(K - 1), a_orth * particular);
        const auto sol = detail::minimize_pnorm(model, bound.omega, p, opts, tol);
        Eigen::VectorXcd padded(K);
        padded(0) = 0.0;
        padded.tail(K - 1) = sol.y;
        const Eigen::VectorXcd c_orth = particular + refl.apply(padded);
        const Eigen::MatrixXcd r = qr.matrixQR().topLeftCorner(K, K).triangularView<Eigen::Upper>();
        coeffs = qr.colsPermutation() * Eigen::VectorXcd(r.triangularView<Eigen::Upper>().solve(c_orth));
        const Complex scale = (ell.array() * coeffs.array()).sum();
        coeffs /= scale;
        objective = detail::weighted_power_sum(design * coeffs, bound.omega, p);
        res.iterations = sol.iterations;
        res.stationarity = sol.stationarity;
        res.start_spread = sol.spread;
        res.converged = sol.converged;
    }
    if (!(objective > 0.0) || !std::isfinite(objective)) throw SolverError("extremal function has no finite p-norm");
    res.kernel_value = std::pow(objective, -2.0 / p);
    res.extremal = HoloFunction(basis, std::move(coeffs));
    return res;
}

ExtremalResult p_extremal(const TruncatedBasis& basis, const QuadratureRule& rule, const Weight& weight, double p,
                          const Point& z, const SolverOptions& opts) {
    if (z.size() != basis.dim()) throw ValidationError("point dimension does not match basis dimension");
    return functional_extremal(basis, rule, weight, p, evaluate_basis(basis, z, false).values, opts);
}

KernelProfile kernel_profile(const Domain& domain, double p, const std::vector<Point>& path,
                             const TruncatedBasis& basis, const QuadratureRule& rule, const Weight& weight,
                             const SolverOptions& opts) {
    for (const auto& z : path) {
        if (!domain.contains(z)) throw ValidationError("profile point is not interior to the domain");
    }
    KernelProfile out;
    for (std::size_t k = 0; k < path.size(); ++k) {
        ProfilePoint pt{path[k], p_extremal(basis, rule, weight, p, path[k], opts)};
        if (k > 0) {
            pt.increased = pt.result.kernel_value > out.points.back().result.kernel_value;
            out.strictly_increasing = out.strictly_increasing && pt.increased;
        }
        out.points.push_back(std::move(pt));
    }
    return out;
}

}  // namespace pberg

#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "pberg/domains.hpp"
#include "pberg/types.hpp"

namespace pberg {

using MultiIndex = std::array<int, 3>;

/// Monomials z^alpha with |alpha| <= degree in graded-lexicographic order: by total degree,
/// then lexicographically descending, so index 0 is 1 and indices 1..n are z_1..z_n.
class TruncatedBasis {
public:
    TruncatedBasis(int dim, int degree);

    /// Degree used when a job does not name one: 30, 12, 8 for n = 1, 2, 3.
    static int default_degree(int dim);

    int dim() const noexcept { return dim_; }
    int degree() const noexcept { return degree_; }
    Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(indices_.size()); }
    const std::vector<MultiIndex>& indices() const noexcept { return indices_; }
    const MultiIndex& index(Eigen::Index k) const { return indices_[static_cast<std::size_t>(k)]; }

    /// Position of a multi-index, or -1 when it is outside the truncation.
    Eigen::Index position(const MultiIndex& alpha) const;

    /// Values of all monomials at every row of `nodes` (N x K).
    Eigen::MatrixXcd design(const Eigen::MatrixXcd& nodes) const;

    bool operator==(const TruncatedBasis& other) const noexcept {
        return dim_ == other.dim_ && degree_ == other.degree_;
    }

private:
    int dim_;
    int degree_;
    std::vector<MultiIndex> indices_;
};

struct BasisValues {
    Eigen::VectorXcd values;
    std::optional<Eigen::MatrixXcd> gradients;  // K x n, entry (k, j) = d(z^alpha_k)/dz_j
};

BasisValues evaluate_basis(const TruncatedBasis& basis, const Point& z, bool with_gradient);

/// A holomorphic polynomial given by its coefficients over a truncated basis.
class HoloFunction {
public:
    HoloFunction(TruncatedBasis basis, Eigen::VectorXcd coeffs);
    static HoloFunction zero(const TruncatedBasis& basis);
    static HoloFunction monomial(const TruncatedBasis& basis, Eigen::Index k, Complex c = {1.0, 0.0});

    const TruncatedBasis& basis() const noexcept { return basis_; }
    const Eigen::VectorXcd& coeffs() const noexcept { return coeffs_; }
    int dim() const noexcept { return basis_.dim(); }

    Complex operator()(const Point& z) const;
    Eigen::VectorXcd gradient(const Point& z) const;
    Eigen::VectorXcd values(const Eigen::MatrixXcd& nodes) const;

    /// Same function expressed in a basis of at least its own degree.
    HoloFunction lifted(const TruncatedBasis& larger) const;

private:
    TruncatedBasis basis_;
    Eigen::VectorXcd coeffs_;
};

/// Weighted least squares against a fixed design, factored once with a column-pivoted QR.
/// Rows are scaled by sqrt(weights) before factoring.
class WeightedLeastSquares {
public:
    WeightedLeastSquares(const Eigen::MatrixXcd& design, const Eigen::VectorXd& weights,
                         double condition_cap = 1e13);

    /// |R_00| / |R_kk| of the pivoted factor.
    double condition() const noexcept { return condition_; }
    Eigen::Index cols() const noexcept { return qr_.cols(); }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd>& qr() const noexcept { return qr_; }
    const Eigen::VectorXd& sqrt_weights() const noexcept { return sqrt_w_; }

    /// Coefficients minimizing the weighted misfit, one column per right-hand side.
    Eigen::MatrixXcd solve(const Eigen::MatrixXcd& values) const;

    /// Relative weighted residual of each column of `values` for coefficients `coeffs`.
    Eigen::VectorXd relative_residuals(const Eigen::MatrixXcd& values, const Eigen::MatrixXcd& coeffs) const;

private:
    Eigen::MatrixXcd design_;
    Eigen::VectorXd sqrt_w_;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr_;
    double condition_ = 1.0;
};

struct Projection {
    HoloFunction function;
    double residual = 0.0;   // relative weighted L2 misfit
    double condition = 1.0;  // of the weighted design
};

/// Least-squares projection of tabulated node values onto the basis.
Projection project(const Eigen::VectorXcd& node_values, const TruncatedBasis& basis, const QuadratureRule& rule);

/// Projection of a callable sampled at the rule nodes.
Projection project(const std::function<Complex(const Point&)>& samples, const TruncatedBasis& basis,
                   const QuadratureRule& rule);

}  // namespace pberg

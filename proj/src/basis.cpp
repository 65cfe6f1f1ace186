#include "pberg/basis.hpp"

#include <algorithm>
#include <cmath>

namespace pberg {

namespace {

// All alpha with |alpha| = total in lexicographically descending order.
void append_degree(int dim, int total, std::vector<MultiIndex>& out) {
    MultiIndex alpha{0, 0, 0};
    std::function<void(int, int)> rec = [&](int j, int remaining) {
        if (j == dim - 1) {
            alpha[j] = remaining;
            out.push_back(alpha);
            return;
        }
        for (int a = remaining; a >= 0; --a) {
            alpha[j] = a;
            rec(j + 1, remaining - a);
        }
        alpha[j] = 0;
    };
    rec(0, total);
}

}  // namespace

TruncatedBasis::TruncatedBasis(int dim, int degree) : dim_(dim), degree_(degree) {
    if (dim < 1 || dim > 3) throw ValidationError("basis dimension must be in 1..3");
    if (degree < 0) throw ValidationError("basis degree must be nonnegative");
    for (int k = 0; k <= degree; ++k) append_degree(dim, k, indices_);
}

int TruncatedBasis::default_degree(int dim) {
    switch (dim) {
        case 1: return 30;
        case 2: return 12;
        case 3: return 8;
        default: throw ValidationError("basis dimension must be in 1..3");
    }
}

Eigen::Index TruncatedBasis::position(const MultiIndex& alpha) const {
    const auto it = std::find(indices_.begin(), indices_.end(), alpha);
    return it == indices_.end() ? -1 : static_cast<Eigen::Index>(it - indices_.begin());
}

Eigen::MatrixXcd TruncatedBasis::design(const Eigen::MatrixXcd& nodes) const {
    if (nodes.cols() != dim_) throw ValidationError("node dimension does not match basis dimension");
    const Eigen::Index n_nodes = nodes.rows();
    // powers[j](i, e) = nodes(i, j)^e
    std::vector<Eigen::MatrixXcd> powers(dim_, Eigen::MatrixXcd(n_nodes, degree_ + 1));
    for (int j = 0; j < dim_; ++j) {
        powers[j].col(0).setOnes();
        for (int e = 1; e <= degree_; ++e) powers[j].col(e) = powers[j].col(e - 1).cwiseProduct(nodes.col(j));
    }
    Eigen::MatrixXcd out(n_nodes, size());
    for (Eigen::Index k = 0; k < size(); ++k) {
        const auto& alpha = indices_[static_cast<std::size_t>(k)];
        out.col(k) = powers[0].col(alpha[0]);
        for (int j = 1; j < dim_; ++j) out.col(k).array() *= powers[j].col(alpha[j]).array();
    }
    return out;
}

BasisValues evaluate_basis(const TruncatedBasis& basis, const Point& z, bool with_gradient) {
    if (z.size() != basis.dim()) throw ValidationError("point dimension does not match basis dimension");
    const int n = basis.dim();
    const int d = basis.degree();
    Eigen::MatrixXcd pw(n, d + 1);
    for (int j = 0; j < n; ++j) {
        pw(j, 0) = 1.0;
        for (int e = 1; e <= d; ++e) pw(j, e) = pw(j, e - 1) * z(j);
    }
    BasisValues out;
    out.values.resize(basis.size());
    if (with_gradient) out.gradients = Eigen::MatrixXcd::Zero(basis.size(), n);
    for (Eigen::Index k = 0; k < basis.size(); ++k) {
        const auto& alpha = basis.index(k);
        Complex v = 1.0;
        for (int j = 0; j < n; ++j) v *= pw(j, alpha[j]);
        out.values(k) = v;
        if (with_gradient) {
            for (int j = 0; j < n; ++j) {
                if (alpha[j] == 0) continue;
                Complex g = static_cast<double>(alpha[j]) * pw(j, alpha[j] - 1);
                for (int l = 0; l < n; ++l) {
                    if (l != j) g *= pw(l, alpha[l]);
                }
                (*out.gradients)(k, j) = g;
            }
        }
    }
    return out;
}

HoloFunction::HoloFunction(TruncatedBasis basis, Eigen::VectorXcd coeffs)
    : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != basis_.size()) throw ValidationError("coefficient count does not match basis size");
}

HoloFunction HoloFunction::zero(const TruncatedBasis& basis) {
    return HoloFunction(basis, Eigen::VectorXcd::Zero(basis.size()));
}

HoloFunction HoloFunction::monomial(const TruncatedBasis& basis, Eigen::Index k, Complex c) {
    Eigen::VectorXcd coeffs = Eigen::VectorXcd::Zero(basis.size());
    coeffs(k) = c;
    return HoloFunction(basis, std::move(coeffs));
}

Complex HoloFunction::operator()(const Point& z) const {
    return (evaluate_basis(basis_, z, false).values.array() * coeffs_.array()).sum();
}

Eigen::VectorXcd HoloFunction::gradient(const Point& z) const {
    const auto bv = evaluate_basis(basis_, z, true);
    return bv.gradients->transpose() * coeffs_;
}

Eigen::VectorXcd HoloFunction::values(const Eigen::MatrixXcd& nodes) const { return basis_.design(nodes) * coeffs_; }

HoloFunction HoloFunction::lifted(const TruncatedBasis& larger) const {
    if (larger.dim() != basis_.dim() || larger.degree() < basis_.degree()) {
        throw ValidationError("cannot lift a function into a smaller basis");
    }
    // Graded order makes the smaller basis a prefix of the larger one.
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(larger.size());
    c.head(coeffs_.size()) = coeffs_;
    return HoloFunction(larger, std::move(c));
}

WeightedLeastSquares::WeightedLeastSquares(const Eigen::MatrixXcd& design, const Eigen::VectorXd& weights,
                                           double condition_cap)
    : design_(design), sqrt_w_(weights.cwiseSqrt()) {
    if (design.rows() != weights.size()) throw ValidationError("design rows do not match weight count");
    if (design.rows() < design.cols()) {
        throw ConditioningError("fewer nodes than basis functions", std::numeric_limits<double>::infinity());
    }
    qr_.compute(sqrt_w_.asDiagonal() * design);
    const auto& r = qr_.matrixQR();
    const double r0 = std::abs(r(0, 0));
    const double rlast = std::abs(r(r.cols() - 1, r.cols() - 1));
    condition_ = rlast > 0.0 ? r0 / rlast : std::numeric_limits<double>::infinity();
    if (!(condition_ <= condition_cap)) {
        throw ConditioningError("basis is rank-deficient on the node set", condition_);
    }
}

Eigen::MatrixXcd WeightedLeastSquares::solve(const Eigen::MatrixXcd& values) const {
    return qr_.solve(sqrt_w_.asDiagonal() * values);
}

Eigen::VectorXd WeightedLeastSquares::relative_residuals(const Eigen::MatrixXcd& values,
                                                         const Eigen::MatrixXcd& coeffs) const {
    const Eigen::MatrixXcd misfit = sqrt_w_.asDiagonal() * (design_ * coeffs - values);
    const Eigen::MatrixXcd scaled = sqrt_w_.asDiagonal() * values;
    Eigen::VectorXd out(values.cols());
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
        const double denom = scaled.col(c).norm();
        out(c) = denom > 0.0 ? misfit.col(c).norm() / denom : misfit.col(c).norm();
    }
    return out;
}

Projection project(const Eigen::VectorXcd& node_values, const TruncatedBasis& basis, const QuadratureRule& rule) {
    if (node_values.size() != rule.size()) throw ValidationError("one sample per quadrature node is required");
    const WeightedLeastSquares ls(basis.design(rule.nodes), rule.weights);
    const Eigen::VectorXcd c = ls.solve(node_values);
    const double res = ls.relative_residuals(node_values, c)(0);
    return Projection{HoloFunction(basis, c), res, ls.condition()};
}

Projection project(const std::function<Complex(const Point&)>& samples, const TruncatedBasis& basis,
                   const QuadratureRule& rule) {
    Eigen::VectorXcd v(rule.size());
    for (Eigen::Index i = 0; i < rule.size(); ++i) v(i) = samples(rule.node(i));
    return project(v, basis, rule);
}

}  // namespace pberg

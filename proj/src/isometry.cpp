#include "pberg/isometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <queue>

#include "pberg/extremal.hpp"

namespace pberg {

Biholomorphism Biholomorphism::identity(int dim) {
    return {dim, [](const Point& z) { return z; }, [](const Point&) { return Complex(1.0, 0.0); }, "identity"};
}

Biholomorphism Biholomorphism::scaling(int dim, Complex factor) {
    const Complex det = std::pow(factor, dim);
    return {dim, [factor](const Point& z) { return Point(factor * z); }, [det](const Point&) { return det; },
            "scaling"};
}

Biholomorphism Biholomorphism::mobius(Complex a) {
    if (!(std::abs(a) < 1.0)) throw ValidationError("Mobius parameter must lie in the unit disk");
    const Complex ac = std::conj(a);
    auto map = [a, ac](const Point& z) {
        Point w(1);
        w(0) = (z(0) - a) / (1.0 - ac * z(0));
        return w;
    };
    auto jac = [a, ac](const Point& z) {
        const Complex d = 1.0 - ac * z(0);
        return (1.0 - std::norm(a)) / (d * d);
    };
    return {1, map, jac, "mobius"};
}

Biholomorphism Biholomorphism::unitary(const Eigen::MatrixXcd& u) {
    if (u.rows() != u.cols() || u.rows() < 1 || u.rows() > 3) throw ValidationError("unitary must be square, n <= 3");
    if (!(u.adjoint() * u).isIdentity(1e-10)) throw ValidationError("matrix is not unitary");
    const Complex det = u.determinant();
    return {static_cast<int>(u.rows()), [u](const Point& z) { return Point(u * z); },
            [det](const Point&) { return det; }, "unitary"};
}

Biholomorphism Biholomorphism::after(const Biholomorphism& inner) const {
    if (inner.dim != dim) throw ValidationError("composed maps differ in dimension");
    auto outer = *this;
    return {dim, [outer, inner](const Point& z) { return outer.map(inner.map(z)); },
            [outer, inner](const Point& z) { return outer.jacobian(inner.map(z)) * inner.jacobian(z); },
            name + "*" + inner.name};
}

HoloFunction IsometryOperator::apply(const HoloFunction& psi) const {
    if (!(psi.basis() == source_basis)) throw ValidationError("function is not in the operator's source basis");
    return HoloFunction(target_basis, matrix * psi.coeffs());
}

namespace {

struct DisjointSets {
    std::vector<Eigen::Index> parent;
    explicit DisjointSets(Eigen::Index n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), Eigen::Index{0});
    }
    Eigen::Index find(Eigen::Index i) {
        while (parent[static_cast<std::size_t>(i)] != i) {
            auto& p = parent[static_cast<std::size_t>(i)];
            p = parent[static_cast<std::size_t>(p)];
            i = p;
        }
        return i;
    }
    bool unite(Eigen::Index a, Eigen::Index b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[static_cast<std::size_t>(a)] = b;
        return true;
    }
};

struct Edge {
    double length;
    Eigen::Index a, b;
};

// Pairs of nodes closer than h, found by bucketing real coordinates into cells of size h.
std::vector<Edge> neighbor_edges(const Eigen::MatrixXd& x, double h) {
    const Eigen::Index n = x.rows();
    const int d = static_cast<int>(x.cols());
    std::map<std::vector<long>, std::vector<Eigen::Index>> cells;
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<long> key(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) key[static_cast<std::size_t>(k)] = static_cast<long>(std::floor(x(i, k) / h));
        cells[key].push_back(i);
    }
    std::vector<Edge> edges;
    int offsets = 1;
    for (int k = 0; k < d; ++k) offsets *= 3;
    for (const auto& [key, members] : cells) {
        for (int o = 0; o < offsets; ++o) {
            std::vector<long> other = key;
            int code = o;
            for (int k = 0; k < d; ++k, code /= 3) other[static_cast<std::size_t>(k)] += code % 3 - 1;
            if (other < key) continue;
            const auto it = cells.find(other);
            if (it == cells.end()) continue;
            const bool same = other == key;
            for (Eigen::Index i : members) {
                for (Eigen::Index j : it->second) {
                    if (same && j <= i) continue;
                    const double len = (x.row(i) - x.row(j)).norm();
                    if (len <= h) edges.push_back({len, i, j});
                }
            }
        }
    }
    return edges;
}

}  // namespace

Eigen::VectorXcd jacobian_power(const Eigen::VectorXcd& jacobian, double exponent, const QuadratureRule& rule,
                                const Domain& domain) {
    const Eigen::Index n = jacobian.size();
    if (n != rule.size()) throw ValidationError("Jacobian samples do not match the rule");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(std::abs(jacobian(i)) > 0.0) || !std::isfinite(std::abs(jacobian(i)))) {
            throw BranchError("Jacobian vanishes or is not finite on a quadrature node");
        }
    }
    const double rounded = std::round(exponent);
    if (std::abs(exponent - rounded) < 1e-12) {
        Eigen::VectorXcd out(n);
        for (Eigen::Index i = 0; i < n; ++i) out(i) = std::pow(jacobian(i), static_cast<int>(rounded));
        return out;
    }
    if (!domain.simply_connected()) {
        throw BranchError("J^{2/p} with 2/p not an integer needs a simply connected domain");
    }

    // Real coordinates of the nodes.
    const int d = 2 * rule.dim();
    Eigen::MatrixXd x(n, d);
    x.leftCols(rule.dim()) = rule.nodes.real();
    x.rightCols(rule.dim()) = rule.nodes.imag();
    const Eigen::VectorXd extent = x.colwise().maxCoeff() - x.colwise().minCoeff();
    double h = extent.maxCoeff() / std::pow(static_cast<double>(n), 1.0 / d);
    if (!(h > 0.0)) h = 1.0;

    std::vector<Edge> edges;
    std::vector<std::vector<Eigen::Index>> tree;
    for (int attempt = 0;; ++attempt) {
        edges = neighbor_edges(x, h);
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            return std::tie(a.length, a.a, a.b) < std::tie(b.length, b.a, b.b);
        });
        DisjointSets sets(n);
        tree.assign(static_cast<std::size_t>(n), {});
        Eigen::Index joined = 0;
        for (const auto& e : edges) {
            if (sets.unite(e.a, e.b)) {
                tree[static_cast<std::size_t>(e.a)].push_back(e.b);
                tree[static_cast<std::size_t>(e.b)].push_back(e.a);
                ++joined;
            }
        }
        if (joined == n - 1) break;
        if (attempt > 40) throw BranchError("node set is not connected at any tested scale");
        h *= 1.5;
    }

    const Point c = domain.center();
    Eigen::Index anchor = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double dist = (rule.node(i) - c).norm();
        if (dist < best) {
            best = dist;
            anchor = i;
        }
    }

    std::vector<double> arg(static_cast<std::size_t>(n), 0.0);
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::queue<Eigen::Index> queue;
    arg[static_cast<std::size_t>(anchor)] = std::arg(jacobian(anchor));
    seen[static_cast<std::size_t>(anchor)] = true;
    queue.push(anchor);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    while (!queue.empty()) {
        const Eigen::Index i = queue.front();
        queue.pop();
        for (Eigen::Index j : tree[static_cast<std::size_t>(i)]) {
            if (seen[static_cast<std::size_t>(j)]) continue;
            const double parent = arg[static_cast<std::size_t>(i)];
            const double raw = std::arg(jacobian(j));
            arg[static_cast<std::size_t>(j)] = raw + two_pi * std::round((parent - raw) / two_pi);
            seen[static_cast<std::size_t>(j)] = true;
            queue.push(j);
        }
    }
    for (const auto& e : edges) {
        if (std::abs(arg[static_cast<std::size_t>(e.a)] - arg[static_cast<std::size_t>(e.b)]) > std::numbers::pi / 2) {
            throw BranchError("arg J winds around the origin over the node set");
        }
    }
    Eigen::VectorXcd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = arg[static_cast<std::size_t>(i)];
        out(i) = std::exp(exponent * Complex(std::log(std::abs(jacobian(i))), a));
    }
    return out;
}

IsometryOperator pullback_operator(const Biholomorphism& f, double p, const TruncatedBasis& source_basis,
                                   const TruncatedBasis& target_basis, const Domain& omega_1,
                                   const QuadratureRule& rule_1, const PullbackOptions& opts) {
    if (!(p > 0.0) || !std::isfinite(p)) throw ValidationError("p must be positive and finite");
    if (f.dim != rule_1.dim() || f.dim != target_basis.dim() || f.dim != omega_1.dim()) {
        throw ValidationError("map, domain, rule and target basis dimensions differ");
    }
    if (source_basis.dim() != f.dim) throw ValidationError("source basis dimension differs from the map's");
    const Eigen::Index n = rule_1.size();

    Eigen::VectorXcd jac(n);
    Eigen::MatrixXcd images(n, f.dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Point z = rule_1.node(i);
        const Point w = f.map(z);
        if (w.size() != f.dim) throw ValidationError("map returned a point of the wrong dimension");
        images.row(i) = w.transpose();
        jac(i) = f.jacobian(z);
    }
    const Eigen::VectorXcd factor = jacobian_power(jac, 2.0 / p, rule_1, omega_1);
    const Eigen::MatrixXcd values = factor.asDiagonal() * source_basis.design(images);

    const WeightedLeastSquares ls(target_basis.design(rule_1.nodes), rule_1.weights);
    IsometryOperator op;
    op.matrix = ls.solve(values);
    op.p = p;
    op.source_basis = source_basis;
    op.target_basis = target_basis;
    op.direction = IsometryDirection::pullback;
    op.projection_residual = ls.relative_residuals(values, op.matrix).maxCoeff();
    if (op.projection_residual > opts.residual_cap) {
        throw RefusedError("pullback projection residual " + std::to_string(op.projection_residual) +
                           " exceeds the cap; raise the target degree");
    }
    return op;
}

BatteryReport isometry_battery(const IsometryOperator& op, const QuadratureRule& rule_1,
                               const QuadratureRule& rule_2, int count) {
    if (op.direction != IsometryDirection::pullback) throw ValidationError("battery expects a pullback operator");
    BatteryReport out;
    const int k = static_cast<int>(std::min<Eigen::Index>(count, op.source_basis.size()));
    double total = 0.0;
    for (int j = 0; j < k; ++j) {
        const HoloFunction psi = HoloFunction::monomial(op.source_basis, j);
        const double ref = pnorm(psi, op.p, rule_2, Weight::zero());
        const double img = pnorm(op.apply(psi), op.p, rule_1, Weight::zero());
        const double defect = std::abs(img - ref) / ref;
        out.max_defect = std::max(out.max_defect, defect);
        total += defect;
    }
    out.functions = k;
    out.mean_defect = k > 0 ? total / k : 0.0;
    return out;
}

bool RationalMap::usable(const Point& z) const { return std::abs(denominator(z)) > exclusion_threshold; }

std::optional<Point> RationalMap::operator()(const Point& z) const {
    const Complex d = denominator(z);
    if (!(std::abs(d) > exclusion_threshold)) return std::nullopt;
    Point w(dim());
    for (int j = 0; j < dim(); ++j) w(j) = numerators[static_cast<std::size_t>(j)](z) / d;
    return w;
}

std::optional<Complex> RationalMap::jacobian(const Point& z) const {
    const Complex d = denominator(z);
    if (!(std::abs(d) > exclusion_threshold)) return std::nullopt;
    const Eigen::VectorXcd dd = denominator.gradient(z);
    Eigen::MatrixXcd m(dim(), dim());
    for (int j = 0; j < dim(); ++j) {
        const auto& num = numerators[static_cast<std::size_t>(j)];
        const Complex nj = num(z);
        const Eigen::VectorXcd gj = num.gradient(z);
        m.row(j) = ((gj * d - nj * dd) / (d * d)).transpose();
    }
    return m.determinant();
}

Reconstruction reconstruct_map(const IsometryOperator& op, const std::vector<Point>& reference_points,
                               const ReconstructOptions& opts) {
    if (op.source_basis.dim() != op.target_basis.dim()) {
        throw RefusedError("operator relates domains of different dimension; no equidimensional map to recover");
    }
    const int n = op.source_basis.dim();
    if (op.source_basis.size() < n + 1 || op.target_basis.size() < n + 1) {
        throw RefusedError("operator bases do not contain the linear monomials");
    }
    Reconstruction out;
    Eigen::MatrixXcd phis;  // columns phi_0..phi_n over the Omega_1 basis
    TruncatedBasis basis_1 = op.target_basis;
    if (op.direction == IsometryDirection::pullback) {
        phis = op.matrix.leftCols(n + 1);
    } else {
        basis_1 = op.source_basis;
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(op.matrix);
        const Eigen::Index k = std::min(op.matrix.rows(), op.matrix.cols());
        const auto diag = qr.matrixQR().diagonal();
        const double top = std::abs(diag(0));
        const double bottom = std::abs(diag(k - 1));
        out.condition = bottom > 0.0 ? top / bottom : std::numeric_limits<double>::infinity();
        if (qr.rank() < op.matrix.cols() || !(out.condition <= opts.condition_cap)) {
            throw ConditioningError("forward operator is too ill-conditioned to invert", out.condition);
        }
        const Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Identity(op.matrix.rows(), n + 1);
        phis = qr.solve(rhs);
        const Eigen::MatrixXcd resid = op.matrix * phis - rhs;
        out.solve_residual = resid.colwise().norm().maxCoeff();
    }
    out.map.denominator = HoloFunction(basis_1, phis.col(0));
    for (int j = 1; j <= n; ++j) out.map.numerators.emplace_back(basis_1, phis.col(j));

    if (opts.tau > 0.0) {
        out.map.exclusion_threshold = opts.tau;
    } else {
        double peak = 0.0;
        for (const auto& z : reference_points) peak = std::max(peak, std::abs(out.map.denominator(z)));
        if (reference_points.empty()) peak = out.map.denominator.coeffs().cwiseAbs().maxCoeff();
        out.map.exclusion_threshold = opts.tau_relative * peak;
    }
    return out;
}

JacobianReport verify_jacobian_relation(const IsometryOperator& op, const RationalMap& f, double p,
                                        const std::vector<Point>& points,
                                        const std::vector<HoloFunction>& test_functions, double delta_relative) {
    if (!(p > 0.0)) throw ValidationError("p must be positive");
    const bool pullback = op.direction == IsometryDirection::pullback;
    const TruncatedBasis& basis_1 = pullback ? op.target_basis : op.source_basis;
    JacobianReport out;
    out.battery_size = static_cast<int>(test_functions.size());

    std::vector<Point> images;
    std::vector<double> jac_factor;
    std::vector<const Point*> kept;
    for (const auto& z : points) {
        const auto w = f(z);
        const auto j = f.jacobian(z);
        if (!w || !j) {
            ++out.excluded;
            continue;
        }
        images.push_back(*w);
        jac_factor.push_back(std::pow(std::abs(*j), 2.0 / p));
        kept.push_back(&z);
    }

    std::optional<Eigen::ColPivHouseholderQR<Eigen::MatrixXcd>> qr;
    if (pullback && !test_functions.empty()) qr.emplace(op.matrix);

    double total = 0.0;
    long count = 0;
    for (const auto& phi : test_functions) {
        const HoloFunction phi_1 = phi.basis() == basis_1 ? phi : phi.lifted(basis_1);
        Eigen::VectorXcd t_coeffs;
        if (pullback) {
            t_coeffs = qr->solve(phi_1.coeffs());
            const double scale = std::max(phi_1.coeffs().norm(), 1e-300);
            out.solve_residual = std::max(out.solve_residual, (op.matrix * t_coeffs - phi_1.coeffs()).norm() / scale);
        } else {
            t_coeffs = op.matrix * phi_1.coeffs();
        }
        const HoloFunction t_phi(pullback ? op.source_basis : op.target_basis, t_coeffs);
        double peak = 0.0;
        std::vector<double> rhs(kept.size());
        for (std::size_t k = 0; k < kept.size(); ++k) {
            rhs[k] = std::abs(phi_1(*kept[k]));
            peak = std::max(peak, rhs[k]);
        }
        const double delta = delta_relative * peak;
        for (std::size_t k = 0; k < kept.size(); ++k) {
            const double lhs = std::abs(t_phi(images[k])) * jac_factor[k];
            const double denom = rhs[k] + delta;
            const double r = denom > 0.0 ? std::abs(lhs - rhs[k]) / denom : std::abs(lhs - rhs[k]);
            out.max_residual = std::max(out.max_residual, r);
            total += r;
            ++count;
        }
    }
    out.evaluated = static_cast<int>(kept.size());
    out.mean_residual = count > 0 ? total / static_cast<double>(count) : 0.0;
    return out;
}

std::vector<HoloFunction> column_battery(const IsometryOperator& op, int count) {
    if (op.direction != IsometryDirection::pullback) throw ValidationError("column battery expects a pullback operator");
    std::vector<HoloFunction> out;
    const Eigen::Index k = std::min<Eigen::Index>(count, op.matrix.cols());
    for (Eigen::Index j = 0; j < k; ++j) out.emplace_back(op.target_basis, op.matrix.col(j));
    return out;
}

std::vector<Point> disk_grid(Complex center, double radius, int rings, int per_ring, bool include_center) {
    std::vector<Point> out;
    if (include_center) out.push_back(Point::Constant(1, center));
    for (int r = 1; r <= rings; ++r) {
        const double rho = radius * r / rings;
        for (int j = 0; j < per_ring; ++j) {
            Point z(1);
            z(0) = center + std::polar(rho, 2.0 * std::numbers::pi * j / per_ring);
            out.push_back(z);
        }
    }
    return out;
}

}  // namespace pberg

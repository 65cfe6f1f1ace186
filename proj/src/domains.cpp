#include "pberg/domains.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pberg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError(std::string(what) + " must be finite and strictly positive");
    }
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Rule on the disk {|z - center| < radius}: Gauss radial nodes times equispaced angles.
QuadratureRule disk_rule(Complex center, double radius, int radial, int angles) {
    auto [r, g] = gauss_legendre(radial, 0.0, radius);
    QuadratureRule rule;
    rule.nodes.resize(static_cast<Eigen::Index>(radial) * angles, 1);
    rule.weights.resize(rule.nodes.rows());
    const double dtheta = kTwoPi / angles;
    for (int k = 0; k < radial; ++k) {
        for (int j = 0; j < angles; ++j) {
            const Eigen::Index i = static_cast<Eigen::Index>(k) * angles + j;
            rule.nodes(i, 0) = center + std::polar(r[k], dtheta * j);
            rule.weights(i) = g[k] * r[k] * dtheta;
        }
    }
    rule.polar = PolarLayout{center, r, angles};
    return rule;
}

QuadratureRule tensor_product(const std::vector<QuadratureRule>& factors) {
    Eigen::Index total = 1;
    for (const auto& f : factors) total *= f.size();
    const int n = static_cast<int>(factors.size());
    QuadratureRule rule;
    rule.nodes.resize(total, n);
    rule.weights.resize(total);
    for (Eigen::Index i = 0; i < total; ++i) {
        Eigen::Index rest = i;
        double w = 1.0;
        for (int j = n - 1; j >= 0; --j) {
            const Eigen::Index k = rest % factors[j].size();
            rest /= factors[j].size();
            rule.nodes(i, j) = factors[j].nodes(k, 0);
            w *= factors[j].weights(k);
        }
        rule.weights(i) = w;
    }
    return rule;
}

// Ball in C^n, n >= 2: z_j = rho * x_j * exp(i theta_j) where (x_1..x_n) runs over the
// positive orthant of S^{n-1} in spherical angles.
QuadratureRule ball_rule(int n, double radius, int radial, int polar, int angles) {
    auto [rho, grho] = gauss_legendre(radial, 0.0, radius);
    auto [eta, geta] = gauss_legendre(polar, 0.0, std::numbers::pi / 2.0);

    // Orthant points and their weights prod(x_j) * dsigma.
    std::vector<std::vector<double>> mags;
    std::vector<double> mag_w;
    const int m = n - 1;
    std::vector<int> idx(m, 0);
    while (true) {
        std::vector<double> x(n);
        double sprod = 1.0;
        double w = 1.0;
        for (int j = 0; j < m; ++j) {
            const double e = eta[idx[j]];
            x[j] = sprod * std::cos(e);
            w *= geta[idx[j]] * std::pow(std::sin(e), m - 1 - j);
            sprod *= std::sin(e);
        }
        x[n - 1] = sprod;
        for (double v : x) w *= v;
        mags.push_back(std::move(x));
        mag_w.push_back(w);
        int j = 0;
        while (j < m && ++idx[j] == polar) idx[j++] = 0;
        if (j == m) break;
    }

    Eigen::Index torus = 1;
    for (int j = 0; j < n; ++j) torus *= angles;
    const double dtheta = kTwoPi / angles;
    const double torus_w = std::pow(dtheta, n);

    QuadratureRule rule;
    const Eigen::Index total = static_cast<Eigen::Index>(radial) * static_cast<Eigen::Index>(mags.size()) * torus;
    rule.nodes.resize(total, n);
    rule.weights.resize(total);
    Eigen::Index i = 0;
    for (int a = 0; a < radial; ++a) {
        const double wr = grho[a] * std::pow(rho[a], 2 * n - 1);
        for (std::size_t b = 0; b < mags.size(); ++b) {
            for (Eigen::Index t = 0; t < torus; ++t, ++i) {
                Eigen::Index rest = t;
                for (int j = n - 1; j >= 0; --j) {
                    const Eigen::Index k = rest % angles;
                    rest /= angles;
                    rule.nodes(i, j) = std::polar(rho[a] * mags[b][j], dtheta * static_cast<double>(k));
                }
                rule.weights(i) = wr * mag_w[b] * torus_w;
            }
        }
    }
    return rule;
}

QuadratureRule indicator_rule(const IndicatorShape& s, int n, int resolution) {
    const int reals = 2 * n;
    std::vector<double> lo(reals), step(reals);
    double cell = 1.0;
    for (int j = 0; j < n; ++j) {
        lo[2 * j] = s.box_lo(j).real();
        lo[2 * j + 1] = s.box_lo(j).imag();
        step[2 * j] = (s.box_hi(j).real() - s.box_lo(j).real()) / resolution;
        step[2 * j + 1] = (s.box_hi(j).imag() - s.box_lo(j).imag()) / resolution;
        cell *= step[2 * j] * step[2 * j + 1];
    }
    std::vector<Point> inside;
    std::vector<int> idx(reals, 0);
    Point z(n);
    while (true) {
        for (int j = 0; j < n; ++j) {
            z(j) = Complex(lo[2 * j] + (idx[2 * j] + 0.5) * step[2 * j],
                           lo[2 * j + 1] + (idx[2 * j + 1] + 0.5) * step[2 * j + 1]);
        }
        if (s.membership(z)) inside.push_back(z);
        int j = 0;
        while (j < reals && ++idx[j] == resolution) idx[j++] = 0;
        if (j == reals) break;
    }
    if (inside.empty()) {
        throw ValidationError("indicator domain has zero sampled measure");
    }
    QuadratureRule rule;
    rule.nodes.resize(static_cast<Eigen::Index>(inside.size()), n);
    rule.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(inside.size()), cell);
    for (std::size_t i = 0; i < inside.size(); ++i) rule.nodes.row(static_cast<Eigen::Index>(i)) = inside[i].transpose();
    return rule;
}

QuadratureRule raw_rule(const Domain& domain, int res) {
    const int n = domain.dim();
    return std::visit(
        overloaded{
            [&](const DiskShape& s) { return disk_rule(s.center, s.radius, res, 2 * res); },
            [&](const HartogsFiberShape& s) { return disk_rule({0.0, 0.0}, s.radius, res, 2 * res); },
            [&](const EllipseShape& s) {
                QuadratureRule rule = disk_rule({0.0, 0.0}, 1.0, res, 2 * res);
                for (Eigen::Index i = 0; i < rule.size(); ++i) {
                    const Complex u = rule.nodes(i, 0);
                    rule.nodes(i, 0) = Complex(s.semi_a * u.real(), s.semi_b * u.imag());
                }
                rule.weights *= s.semi_a * s.semi_b;
                rule.polar.reset();
                return rule;
            },
            [&](const BallShape& s) {
                if (n == 1) return disk_rule({0.0, 0.0}, s.radius, res, 2 * res);
                return ball_rule(n, s.radius, res / 2 + n, std::max(res / 2, 2), res + 1);
            },
            [&](const PolydiskShape& s) {
                if (n == 1) return disk_rule({0.0, 0.0}, s.radii[0], res, 2 * res);
                std::vector<QuadratureRule> factors;
                for (double r : s.radii) factors.push_back(disk_rule({0.0, 0.0}, r, std::max(res / 2, 2), res + 1));
                return tensor_product(factors);
            },
            [&](const IndicatorShape& s) { return indicator_rule(s, n, res); },
        },
        domain.shape());
}

// Smooth non-polynomial probe used for the refinement error estimate.
double probe_integral(const QuadratureRule& rule, const Point& center, double scale) {
    return integrate(rule, [&](const Point& z) {
        const double d2 = (z - center).squaredNorm() / (scale * scale);
        return std::exp(-d2) * (1.0 + 0.5 * (z(0) - center(0)).real() / scale);
    });
}

}  // namespace

Domain Domain::disk(Complex center, double radius) {
    require_positive(radius, "disk radius");
    return Domain(DiskShape{center, radius}, 1, true);
}

Domain Domain::ball(int dim, double radius) {
    if (dim < 1 || dim > 3) throw ValidationError("ball dimension must be in 1..3");
    require_positive(radius, "ball radius");
    return Domain(BallShape{dim, radius}, dim, true);
}

Domain Domain::ellipse(double semi_a, double semi_b) {
    require_positive(semi_a, "ellipse semiaxis");
    require_positive(semi_b, "ellipse semiaxis");
    return Domain(EllipseShape{semi_a, semi_b}, 1, true);
}

Domain Domain::polydisk(std::vector<double> radii) {
    if (radii.empty() || radii.size() > 3) throw ValidationError("polydisk needs 1..3 radii");
    for (double r : radii) require_positive(r, "polydisk radius");
    const int n = static_cast<int>(radii.size());
    return Domain(PolydiskShape{std::move(radii)}, n, true);
}

Domain Domain::indicator(Point box_lo, Point box_hi, std::function<bool(const Point&)> membership,
                         bool simply_connected) {
    const auto n = box_lo.size();
    if (n < 1 || n > 3 || box_hi.size() != n) throw ValidationError("indicator box must have matching dimension 1..3");
    for (Eigen::Index j = 0; j < n; ++j) {
        if (!(box_hi(j).real() > box_lo(j).real()) || !(box_hi(j).imag() > box_lo(j).imag())) {
            throw ValidationError("indicator bounding box has zero measure");
        }
    }
    if (!membership) throw ValidationError("indicator domain needs a membership test");
    return Domain(IndicatorShape{std::move(box_lo), std::move(box_hi), std::move(membership)},
                  static_cast<int>(n), simply_connected);
}

Domain Domain::hartogs_fiber(double radius) {
    require_positive(radius, "fiber radius");
    return Domain(HartogsFiberShape{radius}, 1, true);
}

bool Domain::contains(const Point& z) const {
    if (z.size() != dim_) return false;
    return std::visit(
        overloaded{
            [&](const DiskShape& s) { return std::abs(z(0) - s.center) < s.radius; },
            [&](const HartogsFiberShape& s) { return std::abs(z(0)) < s.radius; },
            [&](const EllipseShape& s) {
                const double x = z(0).real() / s.semi_a;
                const double y = z(0).imag() / s.semi_b;
                return x * x + y * y < 1.0;
            },
            [&](const BallShape& s) { return z.squaredNorm() < s.radius * s.radius; },
            [&](const PolydiskShape& s) {
                for (int j = 0; j < dim_; ++j) {
                    if (!(std::abs(z(j)) < s.radii[j])) return false;
                }
                return true;
            },
            [&](const IndicatorShape& s) {
                for (int j = 0; j < dim_; ++j) {
                    if (z(j).real() < s.box_lo(j).real() || z(j).real() > s.box_hi(j).real() ||
                        z(j).imag() < s.box_lo(j).imag() || z(j).imag() > s.box_hi(j).imag()) {
                        return false;
                    }
                }
                return s.membership(z);
            },
        },
        shape_);
}

Point Domain::center() const {
    if (const auto* d = std::get_if<DiskShape>(&shape_)) {
        Point c(1);
        c(0) = d->center;
        return c;
    }
    if (const auto* s = std::get_if<IndicatorShape>(&shape_)) {
        return (s->box_lo + s->box_hi) / 2.0;
    }
    return Point::Zero(dim_);
}

std::pair<Point, Point> Domain::bounding_box() const {
    Point lo(dim_), hi(dim_);
    auto square = [&](int j, Complex c, double r) {
        lo(j) = c - Complex(r, r);
        hi(j) = c + Complex(r, r);
    };
    std::visit(overloaded{
                   [&](const DiskShape& s) { square(0, s.center, s.radius); },
                   [&](const HartogsFiberShape& s) { square(0, {0.0, 0.0}, s.radius); },
                   [&](const EllipseShape& s) {
                       lo(0) = Complex(-s.semi_a, -s.semi_b);
                       hi(0) = Complex(s.semi_a, s.semi_b);
                   },
                   [&](const BallShape& s) {
                       for (int j = 0; j < dim_; ++j) square(j, {0.0, 0.0}, s.radius);
                   },
                   [&](const PolydiskShape& s) {
                       for (int j = 0; j < dim_; ++j) square(j, {0.0, 0.0}, s.radii[j]);
                   },
                   [&](const IndicatorShape& s) {
                       lo = s.box_lo;
                       hi = s.box_hi;
                   },
               },
               shape_);
    return {lo, hi};
}

std::optional<double> Domain::exact_volume() const {
    constexpr double pi = std::numbers::pi;
    return std::visit(
        overloaded{
            [](const DiskShape& s) -> std::optional<double> { return pi * s.radius * s.radius; },
            [](const HartogsFiberShape& s) -> std::optional<double> { return pi * s.radius * s.radius; },
            [](const EllipseShape& s) -> std::optional<double> { return pi * s.semi_a * s.semi_b; },
            [](const BallShape& s) -> std::optional<double> {
                // vol(B^{2n}(r)) = pi^n r^{2n} / n!
                return std::pow(pi * s.radius * s.radius, s.dim) / std::tgamma(s.dim + 1.0);
            },
            [](const PolydiskShape& s) -> std::optional<double> {
                double v = 1.0;
                for (double r : s.radii) v *= pi * r * r;
                return v;
            },
            [](const IndicatorShape&) -> std::optional<double> { return std::nullopt; },
        },
        shape_);
}

Domain Domain::scaled(double r) const {
    require_positive(r, "scale factor");
    return std::visit(
        overloaded{
            [&](const DiskShape& s) { return disk(s.center * r, s.radius * r); },
            [&](const HartogsFiberShape& s) { return hartogs_fiber(s.radius * r); },
            [&](const EllipseShape& s) { return ellipse(s.semi_a * r, s.semi_b * r); },
            [&](const BallShape& s) { return ball(s.dim, s.radius * r); },
            [&](const PolydiskShape& s) {
                auto radii = s.radii;
                for (auto& x : radii) x *= r;
                return polydisk(std::move(radii));
            },
            [&](const IndicatorShape& s) {
                auto inner = s.membership;
                return indicator(s.box_lo * r, s.box_hi * r,
                                 [inner, r](const Point& z) { return inner(z / r); }, simply_connected_);
            },
        },
        shape_);
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int count, double a, double b) {
    if (count < 1) throw ValidationError("Gauss-Legendre needs at least one node");
    std::vector<double> x(count), w(count);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int i = 0; i < (count + 1) / 2; ++i) {
        // Newton iteration on P_count from the Chebyshev-like initial guess.
        double t = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= count; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = count * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-16) break;
        }
        // Recompute derivative at the converged node.
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= count; ++k) {
            const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = count * (t * p1 - p0) / (t * t - 1.0);
        const double weight = 2.0 / ((1.0 - t * t) * dp * dp);
        // Ascending order: node i from the left end.
        x[i] = mid - half * t;
        x[count - 1 - i] = mid + half * t;
        w[i] = w[count - 1 - i] = half * weight;
    }
    return {x, w};
}

QuadratureRule build_quadrature(const Domain& domain, int resolution) {
    if (resolution < 4) throw ValidationError("quadrature resolution must be at least 4");
    QuadratureRule rule = raw_rule(domain, resolution);
    if (rule.size() == 0 || !(rule.weights.array() > 0.0).all()) {
        throw ValidationError("quadrature produced no usable nodes");
    }
    const QuadratureRule coarse = raw_rule(domain, std::max(resolution / 2, 2));
    auto [lo, hi] = domain.bounding_box();
    double scale = 0.0;
    for (int j = 0; j < domain.dim(); ++j) {
        scale = std::max({scale, 0.5 * (hi(j).real() - lo(j).real()), 0.5 * (hi(j).imag() - lo(j).imag())});
    }
    const Point c = (lo + hi) / 2.0;
    const double fine = probe_integral(rule, c, scale);
    const double rough = probe_integral(coarse, c, scale);
    rule.est_error = std::abs(fine - rough) / std::max(std::abs(fine), 1e-300);
    return rule;
}

double integrate(const QuadratureRule& rule, const std::function<double(const Point&)>& integrand) {
    CompensatedSum sum;
    Point z(rule.dim());
    for (Eigen::Index i = 0; i < rule.size(); ++i) {
        z = rule.nodes.row(i).transpose();
        sum.add(static_cast<long double>(rule.weights(i)) * integrand(z));
    }
    return sum.value();
}

}  // namespace pberg

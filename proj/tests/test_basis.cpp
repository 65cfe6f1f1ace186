#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pberg/basis.hpp"

using namespace pberg;

namespace {
long binomial(int n, int k) {
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}
}  // namespace

TEST_CASE("basis sizes and graded-lex order") {
    for (int n = 1; n <= 3; ++n) {
        for (int d : {0, 1, 4, 7}) CHECK(TruncatedBasis(n, d).size() == binomial(d + n, n));
    }
    const TruncatedBasis b(2, 2);
    CHECK(b.index(0) == MultiIndex{0, 0, 0});
    CHECK(b.index(1) == MultiIndex{1, 0, 0});
    CHECK(b.index(2) == MultiIndex{0, 1, 0});
    CHECK(b.index(3) == MultiIndex{2, 0, 0});
    CHECK(b.index(4) == MultiIndex{1, 1, 0});
    CHECK(b.index(5) == MultiIndex{0, 2, 0});
    for (Eigen::Index k = 0; k < b.size(); ++k) CHECK(b.position(b.index(k)) == k);
    CHECK(b.position({3, 0, 0}) == -1);
    CHECK(TruncatedBasis::default_degree(1) == 30);
    CHECK(TruncatedBasis::default_degree(2) == 12);
    CHECK(TruncatedBasis::default_degree(3) == 8);
}

TEST_CASE("gradients match finite differences") {
    const TruncatedBasis b(2, 4);
    Eigen::VectorXcd c(b.size());
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = Complex(std::sin(1.0 + k), std::cos(2.0 * k));
    const HoloFunction f(b, c);
    Point z(2);
    z << Complex(0.2, -0.1), Complex(-0.3, 0.25);
    const Eigen::VectorXcd g = f.gradient(z);
    const double h = 1e-6;
    for (int j = 0; j < 2; ++j) {
        Point zp = z, zm = z;
        zp(j) += h;
        zm(j) -= h;
        CHECK(std::abs((f(zp) - f(zm)) / (2.0 * h) - g(j)) < 1e-8);
    }
}

TEST_CASE("lifting preserves values") {
    const TruncatedBasis small(2, 2), large(2, 5);
    Eigen::VectorXcd c(small.size());
    c << 1.0, Complex(0, 2), 3.0, -1.0, Complex(0.5, 0.5), 2.0;
    const HoloFunction f(small, c);
    const HoloFunction g = f.lifted(large);
    Point z(2);
    z << Complex(0.4, 0.1), Complex(-0.2, 0.3);
    CHECK(std::abs(f(z) - g(z)) < 1e-14);
    CHECK_THROWS_AS(g.lifted(small), ValidationError);
}

TEST_CASE("projection is idempotent and linear") {
    const TruncatedBasis b(1, 8);
    const QuadratureRule rule = build_quadrature(Domain::unit_disk(), 16);
    Eigen::VectorXcd c(b.size());
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = Complex(1.0 / (1 + k), k % 2 ? 0.5 : -0.5);
    const HoloFunction f(b, c);
    const Projection p = project(f.values(rule.nodes), b, rule);
    CHECK((p.function.coeffs() - c).norm() < 1e-12);
    CHECK(p.residual < 1e-13);
    const Projection pp = project(p.function.values(rule.nodes), b, rule);
    CHECK((pp.function.coeffs() - p.function.coeffs()).norm() < 1e-12);

    auto g = [](const Point& z) { return std::exp(z(0)); };
    auto h = [](const Point& z) { return 1.0 / (2.0 - z(0)); };
    const Complex a(2.0, -1.0), bb(0.5, 3.0);
    const Projection pg = project(g, b, rule), ph = project(h, b, rule);
    const Projection pc = project([&](const Point& z) { return a * g(z) + bb * h(z); }, b, rule);
    CHECK((pc.function.coeffs() - (a * pg.function.coeffs() + bb * ph.function.coeffs())).norm() < 1e-12);
    CHECK(pg.residual > 0.0);
}

TEST_CASE("rank-deficient designs are refused") {
    const QuadratureRule tiny = build_quadrature(Domain::unit_disk(), 4);
    CHECK_THROWS_AS(project([](const Point&) { return Complex(1.0); }, TruncatedBasis(1, 40), tiny),
                    ConditioningError);
    const QuadratureRule rule = build_quadrature(Domain::unit_disk(), 16);
    const TruncatedBasis b(1, 12);
    CHECK_THROWS_AS(WeightedLeastSquares(b.design(rule.nodes), rule.weights, 2.0), ConditioningError);
    CHECK(WeightedLeastSquares(b.design(rule.nodes), rule.weights).condition() > 1.0);
}

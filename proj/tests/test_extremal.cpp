#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "pberg/extremal.hpp"
#include "pberg/variation.hpp"

using namespace pberg;
using std::numbers::pi;

namespace {

Point pt(Complex z) { return Point::Constant(1, z); }

// Independent oracle: Mobius covariance with exponent 4/p moves the center value pi^(-2/p).
double disk_kernel(double p, Complex a) { return std::pow(pi, -2.0 / p) * std::pow(1.0 - std::norm(a), -4.0 / p); }

const QuadratureRule& disk32() {
    static const QuadratureRule r = build_quadrature(Domain::unit_disk(), 32);
    return r;
}

SolverOptions with_path(SolverPath path) {
    SolverOptions o;
    o.path = path;
    return o;
}

}  // namespace

TEST_CASE("center of the disk gives pi^(-2/p) on both solver paths") {
    const TruncatedBasis basis(1, 20);
    for (double p : {0.5, 1.0, 1.5, 2.0, 3.0}) {
        for (SolverPath path : {SolverPath::polar, SolverPath::dense}) {
            const ExtremalResult r = p_extremal(basis, disk32(), Weight::zero(), p, pt(0.0), with_path(path));
            CHECK(r.kernel_value == doctest::Approx(std::pow(pi, -2.0 / p)).epsilon(1e-3));
            CHECK(r.converged);
            CHECK(r.path == (path == SolverPath::polar ? "polar" : "dense"));
        }
    }
}

TEST_CASE("p=2 matches the classical Bergman kernel and the Gram route") {
    const TruncatedBasis basis(1, 40);
    const QuadratureRule rule = build_quadrature(Domain::unit_disk(), 48);
    for (Complex z : {Complex(0.0), Complex(0.5, 0.2), Complex(0.0, -0.7)}) {
        const double exact = 1.0 / (pi * std::pow(1.0 - std::norm(z), 2));
        const double g = gram_kernel(basis, rule, Weight::zero(), pt(z));
        CHECK(g == doctest::Approx(exact).epsilon(1e-6));
        CHECK(p_extremal(basis, rule, Weight::zero(), 2.0, pt(z)).kernel_value == doctest::Approx(g).epsilon(1e-6));
    }
    const QuadratureRule ball = build_quadrature(Domain::ball(2, 1.0), 12);
    CHECK(gram_kernel(TruncatedBasis(2, 4), ball, Weight::zero(), Point::Zero(2)) ==
          doctest::Approx(2.0 / (pi * pi)).epsilon(1e-6));
}

TEST_CASE("Mobius covariance at p=1 with dense and polar routes agreeing") {
    const TruncatedBasis basis(1, 30);
    const QuadratureRule rule = build_quadrature(Domain::unit_disk(), 48);
    const double polar = p_extremal(basis, rule, Weight::zero(), 1.0, pt(0.5), with_path(SolverPath::polar)).kernel_value;
    const double dense = p_extremal(basis, rule, Weight::zero(), 1.0, pt(0.5), with_path(SolverPath::dense)).kernel_value;
    CHECK(polar == doctest::Approx(0.32022).epsilon(5e-3));
    CHECK(polar == doctest::Approx(disk_kernel(1.0, 0.5)).epsilon(1e-4));
    CHECK(dense == doctest::Approx(polar).epsilon(1e-8));
}

TEST_CASE("scaling covariance fixes the exponent 4/p") {
    const TruncatedBasis basis(1, 20);
    for (double p : {0.8, 1.0, 3.0}) {
        const double base = p_extremal(basis, disk32(), Weight::zero(), p, pt({0.3, 0.1})).kernel_value;
        for (double r : {0.5, 2.0}) {
            const QuadratureRule rule = build_quadrature(Domain::disk(0.0, r), 32);
            const double scaled = p_extremal(basis, rule, Weight::zero(), p, pt(Complex(0.3, 0.1) * r)).kernel_value;
            CHECK(scaled * std::pow(r, 4.0 / p) == doctest::Approx(base).epsilon(1e-8));
        }
    }
}

TEST_CASE("enlarging the truncation never lowers the kernel") {
    const QuadratureRule rule = build_quadrature(Domain::unit_disk(), 40);
    for (double p : {1.0, 2.0}) {
        double prev = 0.0;
        for (int d = 2; d <= 26; d += 4) {
            const ExtremalResult r = p_extremal(TruncatedBasis(1, d), rule, Weight::zero(), p, pt(0.6));
            CHECK(r.kernel_value >= prev * (1.0 - r.tol));
            prev = r.kernel_value;
        }
    }
}

TEST_CASE("pnorm is absolutely homogeneous") {
    const TruncatedBasis basis(1, 5);
    Eigen::VectorXcd c(basis.size());
    c << 1.0, Complex(0.0, 2.0), -0.5, Complex(0.3, 0.3), 0.1, Complex(0.0, -0.2);
    for (double p : {0.5, 1.0, 2.0, 4.0}) {
        const double n = pnorm(HoloFunction(basis, c), p, disk32(), Weight::zero());
        for (Complex lambda : {Complex(3.0), Complex(0.0, -0.25), Complex(1.0, 1.0)}) {
            const double m = pnorm(HoloFunction(basis, lambda * c), p, disk32(), Weight::zero());
            CHECK(m == doctest::Approx(std::abs(lambda) * n).epsilon(1e-12));
        }
    }
}

TEST_CASE("a constant weight rescales the kernel by exp(2c/p)") {
    const TruncatedBasis basis(1, 12);
    const double c = 0.7;
    for (double p : {1.0, 2.0}) {
        const double plain = p_extremal(basis, disk32(), Weight::zero(), p, pt(0.2)).kernel_value;
        const double weighted =
            p_extremal(basis, disk32(), Weight::from([c](const Point&) { return c; }), p, pt(0.2)).kernel_value;
        CHECK(weighted == doctest::Approx(plain * std::exp(2.0 * c / p)).epsilon(1e-8));
    }
}

TEST_CASE("weights equal to -inf drop nodes; other non-finite weights are rejected") {
    const double inf = std::numeric_limits<double>::infinity();
    const Weight hole = Weight::from([inf](const Point& z) { return std::abs(z(0)) < 0.2 ? -inf : 0.0; });
    const BoundRule bound = bind_weight(disk32(), hole);
    CHECK(bound.dropped > 0);
    CHECK_FALSE(bound.polar.has_value());
    CHECK(bound.nodes.rows() + bound.dropped == disk32().size());
    const Weight bad = Weight::from([](const Point&) { return std::nan(""); });
    CHECK_THROWS_AS(p_extremal(TruncatedBasis(1, 4), disk32(), bad, 2.0, pt(0.0)), ValidationError);
}

TEST_CASE("invalid inputs are validation errors") {
    const TruncatedBasis basis(1, 6);
    CHECK_THROWS_AS(p_extremal(basis, disk32(), Weight::zero(), 0.0, pt(0.0)), ValidationError);
    CHECK_THROWS_AS(p_extremal(basis, disk32(), Weight::zero(), -1.0, pt(0.0)), ValidationError);
    CHECK_THROWS_AS(functional_extremal(basis, disk32(), Weight::zero(), 1.0, Eigen::VectorXcd::Zero(basis.size())),
                    ValidationError);
    const QuadratureRule ell = build_quadrature(Domain::ellipse(2.0, 1.0), 16);
    CHECK_THROWS_AS(p_extremal(basis, ell, Weight::zero(), 1.0, pt(0.0), with_path(SolverPath::polar)),
                    ValidationError);
    CHECK_THROWS_AS(kernel_profile(Domain::unit_disk(), 2.0, {pt(0.5), pt(1.0)}, basis, disk32()), ValidationError);
}

TEST_CASE("p below 1 uses agreeing multi-starts") {
    SolverOptions opts;
    opts.seed = 11;
    const ExtremalResult r = p_extremal(TruncatedBasis(1, 16), disk32(), Weight::zero(), 0.6, pt(0.3), opts);
    CHECK(r.converged);
    CHECK(r.start_spread <= r.tol);
    CHECK(r.kernel_value == doctest::Approx(disk_kernel(0.6, 0.3)).epsilon(5e-3));
    const ExtremalResult again = p_extremal(TruncatedBasis(1, 16), disk32(), Weight::zero(), 0.6, pt(0.3), opts);
    CHECK(again.kernel_value == r.kernel_value);
}

TEST_CASE("kernel decreases when the domain grows") {
    const TruncatedBasis basis(1, 24);
    const QuadratureRule small = build_quadrature(Domain::disk(0.0, 0.8), 40);
    const QuadratureRule ellipse = build_quadrature(Domain::ellipse(2.0, 1.5), 40);
    for (double p : {1.0, 2.0}) {
        for (Complex z : {Complex(0.0), Complex(0.5, 0.1), Complex(0.0, -0.6)}) {
            const double ks = p_extremal(basis, small, Weight::zero(), p, pt(z)).kernel_value;
            const double kd = p_extremal(basis, disk32(), Weight::zero(), p, pt(z)).kernel_value;
            const double ke = p_extremal(basis, ellipse, Weight::zero(), p, pt(z)).kernel_value;
            CHECK(ks > kd);
            CHECK(kd > ke);
        }
    }
}

TEST_CASE("profiles toward the boundary increase") {
    std::vector<Point> path;
    for (int k = 1; k <= 4; ++k) path.push_back(pt(1.0 - std::ldexp(1.0, -k)));
    const QuadratureRule rule = build_quadrature(Domain::unit_disk(), 80);
    const KernelProfile prof = kernel_profile(Domain::unit_disk(), 2.0, path, TruncatedBasis(1, 70), rule);
    CHECK(prof.strictly_increasing);
    for (const auto& q : prof.points) {
        CHECK(q.result.kernel_value == doctest::Approx(disk_kernel(2.0, q.z(0))).epsilon(1e-2));
    }
}

TEST_CASE("log of the kernel is subharmonic in z") {
    const TruncatedBasis basis(1, 24);
    const TabulatedField field = tabulate_around(
        [&](Complex z) { return std::log(p_extremal(basis, disk32(), Weight::zero(), 1.0, pt(z)).kernel_value); },
        Complex(0.1, 0.0), 0.05, 4);
    const ProbeReport rep = psh_probe(field, {Complex(0.1, 0.0)}, {0.15}, default_probe_tolerance(disk32()));
    REQUIRE(rep.probes.size() == 1);
    CHECK(rep.violations == 0);
    CHECK(rep.probes[0].margin > 0.0);
}

TEST_CASE("a general functional is handled like a point evaluation") {
    const TruncatedBasis basis(1, 20);
    // f -> f'(0) on the disk at p = 2: sup |f'(0)|^2 / ||f||^2 = 2 / pi.
    Eigen::VectorXcd ell = Eigen::VectorXcd::Zero(basis.size());
    ell(1) = 1.0;
    CHECK(gram_functional_norm(basis, disk32(), Weight::zero(), ell) == doctest::Approx(std::sqrt(2.0 / pi)).epsilon(1e-12));
    const ExtremalResult r = functional_extremal(basis, disk32(), Weight::zero(), 2.0, ell);
    CHECK(r.kernel_value == doctest::Approx(2.0 / pi).epsilon(1e-10));
    CHECK(std::abs(r.extremal.coeffs()(1) - Complex(1.0)) < 1e-12);
}

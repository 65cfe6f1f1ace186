#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pberg/domains.hpp"

using namespace pberg;
using std::numbers::pi;

namespace {
Point pt(Complex z) { return Point::Constant(1, z); }
double volume(const QuadratureRule& r) { return r.weights.sum(); }
}  // namespace

TEST_CASE("closed-form volumes are reproduced by the rules") {
    CHECK(volume(build_quadrature(Domain::unit_disk(), 16)) == doctest::Approx(pi).epsilon(1e-13));
    CHECK(volume(build_quadrature(Domain::disk({0.3, -0.2}, 0.5), 16)) == doctest::Approx(pi * 0.25).epsilon(1e-13));
    CHECK(volume(build_quadrature(Domain::ellipse(2.0, 0.5), 16)) == doctest::Approx(pi).epsilon(1e-13));
    CHECK(volume(build_quadrature(Domain::ball(2, 1.0), 16)) == doctest::Approx(pi * pi / 2.0).epsilon(1e-12));
    // The Hopf angles are not integrated exactly, only spectrally.
    const double b3 = std::pow(pi, 3) / 6.0;
    const double coarse = std::abs(volume(build_quadrature(Domain::ball(3, 1.0), 8)) - b3);
    const double fine = std::abs(volume(build_quadrature(Domain::ball(3, 1.0), 10)) - b3);
    CHECK(fine < coarse);
    CHECK(fine < 1e-6 * b3);
    CHECK(volume(build_quadrature(Domain::polydisk({1.0, 0.5}), 8)) == doctest::Approx(pi * pi * 0.25).epsilon(1e-12));
    CHECK(volume(build_quadrature(Domain::hartogs_fiber(0.7), 8)) == doctest::Approx(pi * 0.49).epsilon(1e-13));
}

TEST_CASE("exact volumes agree with the shapes") {
    CHECK(*Domain::ball(2, 2.0).exact_volume() == doctest::Approx(pi * pi / 2.0 * 16.0));
    CHECK(*Domain::ellipse(3.0, 1.0).exact_volume() == doctest::Approx(3.0 * pi));
    const Domain annulus = Domain::indicator(pt({-1, -1}), pt({1, 1}),
                                             [](const Point& z) { return std::abs(z(0)) > 0.5 && std::abs(z(0)) < 1; },
                                             false);
    CHECK_FALSE(annulus.exact_volume().has_value());
    CHECK_FALSE(annulus.simply_connected());
    // The masked midpoint rule converges slowly; a loose check suffices.
    CHECK(volume(build_quadrature(annulus, 64)) == doctest::Approx(0.75 * pi).epsilon(1e-2));
}

TEST_CASE("membership and centers") {
    const Domain d = Domain::disk({1.0, 0.0}, 0.5);
    CHECK(d.contains(pt({1.2, 0.1})));
    CHECK_FALSE(d.contains(pt({1.5, 0.0})));  // the boundary is excluded
    CHECK(d.center()(0) == Complex(1.0, 0.0));
    const Domain e = Domain::ellipse(2.0, 1.0);
    CHECK(e.contains(pt({1.9, 0.0})));
    CHECK_FALSE(e.contains(pt({0.0, 1.1})));
    Point z(2);
    z << Complex(0.6, 0.0), Complex(0.0, 0.6);
    CHECK(Domain::ball(2, 1.0).contains(z));
    CHECK(Domain::polydisk({1.0, 1.0}).contains(z));
    z(1) = Complex(0.0, 0.9);
    CHECK_FALSE(Domain::ball(2, 1.0).contains(z));
    CHECK(Domain::polydisk({1.0, 1.0}).contains(z));
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(Domain::disk({0, 0}, -1.0), ValidationError);
    CHECK_THROWS_AS(Domain::ball(4, 1.0), ValidationError);
    CHECK_THROWS_AS(Domain::ellipse(0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(build_quadrature(Domain::unit_disk(), 3), ValidationError);
}

TEST_CASE("scaling multiplies the volume by r^(2n)") {
    for (const Domain& d : {Domain::unit_disk(), Domain::ellipse(2.0, 1.0), Domain::ball(2, 1.0)}) {
        const double v = volume(build_quadrature(d, 12));
        const double vs = volume(build_quadrature(d.scaled(0.5), 12));
        CHECK(vs == doctest::Approx(v * std::pow(0.25, d.dim())).epsilon(1e-12));
    }
}

TEST_CASE("disk rules carry a ring-major polar layout") {
    const QuadratureRule r = build_quadrature(Domain::unit_disk(), 8);
    REQUIRE(r.polar.has_value());
    const auto& lay = *r.polar;
    CHECK(static_cast<Eigen::Index>(lay.radii.size()) * lay.angles == r.size());
    const Complex expected = std::polar(lay.radii[2], 2.0 * pi * 3 / lay.angles);
    CHECK(std::abs(r.nodes(2 * lay.angles + 3, 0) - expected) < 1e-15);
    CHECK_FALSE(build_quadrature(Domain::ellipse(2.0, 1.0), 8).polar.has_value());
}

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
    const auto [x, w] = gauss_legendre(6, -1.0, 2.0);
    for (int k = 0; k <= 11; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], k);
        const double exact = (std::pow(2.0, k + 1) - std::pow(-1.0, k + 1)) / (k + 1);
        CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
}

TEST_CASE("refinement drives a smooth integral to its floor") {
    const double exact = 2.0 * pi * std::cyl_bessel_i(1.0, 1.0);
    double last = 1.0;
    for (int res : {4, 8, 16, 32}) {
        const QuadratureRule r = build_quadrature(Domain::unit_disk(), res);
        const double err = std::abs(integrate(r, [](const Point& z) { return std::exp(z(0).real()); }) - exact);
        CHECK(err <= std::max(last, 1e-13));
        last = err;
    }
    CHECK(last < 1e-12);
    CHECK(build_quadrature(Domain::unit_disk(), 32).est_error < 1e-12);
}

TEST_CASE("compensated summation keeps cancelled small terms") {
    CompensatedSum s;
    for (double x : {1.0, 1e100, 1.0, -1e100}) s.add(x);
    CHECK(s.value() == 2.0);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "pberg/variation.hpp"

using namespace pberg;
using std::numbers::pi;

namespace {

Point pt(Complex z) { return Point::Constant(1, z); }

constexpr double inf = std::numeric_limits<double>::infinity();

// Centre value of K_m on a disk of radius r = exp(-u): (pi r^2)^(-m).
double hartogs_log_kernel(int m, double u) { return -m * std::log(pi) + 2.0 * m * u; }

// Bergman kernel of the unit disk, K(z, w) = 1 / (pi (1 - z conj(w))^2).
Complex disk_bergman(Complex z, Complex w) { return 1.0 / (pi * std::pow(1.0 - z * std::conj(w), 2)); }

}  // namespace

TEST_CASE("fiber kernels of simple families") {
    const TruncatedBasis basis(1, 20);
    const DomainFamily flat = DomainFamily::product(Domain::unit_disk(), 1);
    CHECK(fiber_kernel(flat, 0.4, pt(0.0), basis, 32).kernel_value == doctest::Approx(1.0 / pi).epsilon(1e-10));

    const DomainFamily h1 = DomainFamily::hartogs(hartogs_profile("abs2"), "abs2", 1);
    CHECK(fiber_kernel(h1, 0.3, pt(0.0), basis, 32).kernel_value ==
          doctest::Approx(std::exp(0.18) / pi).epsilon(1e-3));
    const DomainFamily h2 = DomainFamily::hartogs(hartogs_profile("abs2"), "abs2", 2);
    CHECK(h2.p() == 1.0);
    CHECK(fiber_kernel(h2, 0.3, pt(0.0), basis, 32).kernel_value ==
          doctest::Approx(std::exp(0.36) / (pi * pi)).epsilon(1e-2));

    CHECK_THROWS_AS(fiber_kernel(h1, 1.2, pt(0.0), basis, 32), ValidationError);
    CHECK_THROWS_AS(fiber_kernel(h1, 0.9, pt(0.5), basis, 32), ValidationError);  // fiber radius e^-0.81
    CHECK_THROWS_AS(hartogs_profile("cubic"), ValidationError);
    CHECK_THROWS_AS(family_weight("cubic"), ValidationError);
}

TEST_CASE("Hartogs oracle for every named profile") {
    const TruncatedBasis basis(1, 20);
    for (const std::string tag : {"abs2", "re", "mixed"}) {
        const auto u = hartogs_profile(tag);
        for (int m : {1, 2}) {
            const DomainFamily fam = DomainFamily::hartogs(u, tag, m);
            for (Complex t : {Complex(0.0), Complex(0.3, -0.2), Complex(-0.5, 0.1)}) {
                CAPTURE(tag);
                CAPTURE(m);
                const double k = fiber_kernel(fam, t, pt(0.0), basis, 32).kernel_value;
                CHECK(std::abs(std::log(k) - hartogs_log_kernel(m, u(t))) < 1e-2);
            }
        }
    }
    CHECK(hartogs_profile("mixed")(Complex(0.5, 0.5)) == doctest::Approx(0.2 * 0.5 + 0.0));
    CHECK(hartogs_profile("re")(Complex(-0.25, 3.0)) == -0.25);
}

TEST_CASE("bicubic interpolation reproduces cubic polynomials") {
    auto poly = [](Complex t) {
        const double x = t.real(), y = t.imag();
        return x * x * x * y * y - 2.0 * x * y + 0.5 * y * y * y + 1.0;
    };
    const TabulatedField f = tabulate(poly, Complex(-1.0, -0.5), 0.25, 9, 7);
    for (Complex t : {Complex(-0.9, -0.4), Complex(0.13, 0.71), Complex(0.99, 0.99), Complex(-1.0, -0.5)}) {
        REQUIRE(f(t).has_value());
        CHECK(*f(t) == doctest::Approx(poly(t)).epsilon(1e-12));
    }
    CHECK_FALSE(f(Complex(1.1, 0.0)).has_value());
    TabulatedField holed = f;
    holed.values[3 * 9 + 4] = std::nan("");
    CHECK_FALSE(holed(holed.node(4, 3)).has_value());
    CHECK(holed(holed.node(0, 0)).has_value());
}

TEST_CASE("sub-mean-value probes on explicit fields") {
    const double r = 0.3;
    const TabulatedField abs2 = tabulate_around([](Complex t) { return std::norm(t); }, 0.0, 0.075, 6);
    const ProbeReport a = psh_probe(abs2, {0.0}, {r}, 1e-6);
    REQUIRE(a.probes.size() == 1);
    CHECK(a.probes[0].margin == doctest::Approx(r * r).epsilon(1e-10));
    CHECK(a.violations == 0);

    const TabulatedField re = tabulate_around([](Complex t) { return t.real(); }, 0.0, 0.075, 6);
    const ProbeReport b = psh_probe(re, {0.0, Complex(0.2, 0.0)}, {0.1, r}, 1e-6);
    CHECK(b.probes.size() == 3);
    CHECK(b.skipped == 1);  // radius 0.3 around 0.2 leaves the grid
    for (const auto& rec : b.probes) CHECK(std::abs(rec.margin) < 1e-12);
    CHECK(b.violations == 0);

    const TabulatedField neg = tabulate_around([](Complex t) { return -std::norm(t); }, 0.0, 0.075, 6);
    const ProbeReport c = psh_probe(neg, {0.0}, {r}, 1e-3);
    CHECK(c.violations == 1);
    CHECK(c.min_margin == doctest::Approx(-r * r).epsilon(1e-10));
    CHECK(psh_probe(neg, {0.0}, {r}, 0.1).violations == 0);  // inside the tolerance

    CHECK_THROWS_AS(psh_probe(abs2, {0.0}, {r}, -1.0), ValidationError);
    CHECK_THROWS_AS(psh_probe(abs2, {0.0}, {0.0}, 1e-6), ValidationError);
}

TEST_CASE("-inf values in a probed field") {
    // log|t| is -inf at the centre node: the sub-mean-value inequality holds trivially.
    const TabulatedField lg = tabulate_around([](Complex t) { return std::log(std::abs(t)); }, 0.0, 0.075, 6);
    const ProbeReport centre = psh_probe(lg, {0.0}, {0.3}, 1e-6);
    REQUIRE(centre.probes.size() == 1);
    CHECK(centre.probes[0].margin == inf);
    CHECK(centre.violations == 0);
    // A pole on the circle drags the mean to -inf.
    const TabulatedField shifted = tabulate_around(
        [](Complex t) { return std::abs(t - Complex(0.3, 0.0)) < 1e-9 ? -inf : std::log(std::abs(t - 0.3)); }, 0.0,
        0.075, 6);
    const ProbeReport ring = psh_probe(shifted, {0.0}, {0.3}, 1e-6);
    REQUIRE(ring.probes.size() == 1);
    CHECK(ring.probes[0].circle_mean == -inf);
    CHECK(ring.violations == 1);
}

TEST_CASE("dual norms of point evaluations") {
    const TruncatedBasis basis(1, 20);
    const DomainFamily flat = DomainFamily::product(Domain::unit_disk(), 1);
    const DualNormResult zero = dual_norm(flat, HoloFunctional{}, 0.2, basis, 32);
    CHECK(zero.value == 0.0);
    CHECK(zero.method == "zero");
    const DualNormResult d0 = dual_norm(flat, HoloFunctional::delta(pt(0.0)), 0.4, basis, 32);
    CHECK(d0.value == doctest::Approx(0.56419).epsilon(1e-5));
    CHECK(d0.method == "gram");

    // Two atoms at m = 1: |xi|^2 = sum conj(c_j) c_k K(z_k, z_j).
    const Complex a(0.3, 0.1), b(-0.2, 0.4), ca(1.0, 0.5), cb(-0.7);
    HoloFunctional xi = HoloFunctional::delta(pt(a), ca);
    xi.atoms.push_back(HoloFunctional::delta(pt(b), cb).atoms.front());
    const Complex exact = std::norm(ca) * disk_bergman(a, a) + std::norm(cb) * disk_bergman(b, b) +
                          2.0 * std::conj(ca) * cb * disk_bergman(b, a);
    CHECK(dual_norm(flat, xi, 0.0, basis, 32).value == doctest::Approx(std::sqrt(exact.real())).epsilon(1e-8));

    for (int m : {1, 2}) {
        const DomainFamily fam = DomainFamily::hartogs(hartogs_profile("abs2"), "abs2", m);
        const Point z = pt({0.2, -0.1});
        const DualNormResult d = dual_norm(fam, HoloFunctional::delta(z), 0.3, basis, 32);
        const double k = fiber_kernel(fam, 0.3, z, basis, 32).kernel_value;
        CHECK(d.value * d.value == doctest::Approx(k).epsilon(1e-4));
        CHECK(d.method == (m == 1 ? "gram" : "extremal"));
        const DualNormResult scaled = dual_norm(fam, HoloFunctional::delta(z, {0.0, -3.0}), 0.3, basis, 32);
        CHECK(scaled.value == doctest::Approx(3.0 * d.value).epsilon(1e-8));
    }
    CHECK_THROWS_AS(dual_norm(flat, HoloFunctional::delta(pt(1.5)), 0.0, basis, 32), ValidationError);
}

TEST_CASE("log of the dual norm is subharmonic in t") {
    const TruncatedBasis basis(1, 16);
    const DomainFamily fam = DomainFamily::hartogs(hartogs_profile("mixed"), "mixed", 1);
    const HoloFunctional xi = HoloFunctional::delta(pt(0.1));
    const TabulatedField field = tabulate_around(
        [&](Complex t) { return std::log(dual_norm(fam, xi, t, basis, 24).value); }, 0.0, 0.075, 6);
    const ProbeReport rep =
        psh_probe(field, {0.0, Complex(0.1, -0.1)}, {0.15, 0.3}, default_probe_tolerance(build_quadrature(Domain::unit_disk(), 24)));
    CHECK(rep.violations == 0);
    CHECK(rep.probes.size() + rep.skipped == 4);
    CHECK(rep.probes.size() >= 2);
}

TEST_CASE("minimal extensions stay within the constant pi") {
    const TruncatedBasis zb(1, 1);
    const DomainFamily flat = DomainFamily::product(Domain::unit_disk(), 1);
    for (int k : {0, 1}) {
        const ExtensionResult r = minimal_extension(flat, HoloFunction::monomial(zb, k));
        CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(r.converged);
    }

    DomainFamily twisted = DomainFamily::product(Domain::unit_disk(), 1);
    twisted.with_weight(family_weight("re_tz"), "re_tz", true);
    const HoloFunction one = HoloFunction::monomial(zb, 0);
    double prev = inf;
    for (int a : {0, 1, 2, 4}) {
        ExtensionOptions opts;
        opts.t_degree = a;
        const ExtensionResult r = minimal_extension(twisted, one, opts);
        CAPTURE(a);
        CHECK(r.total <= prev * (1.0 + 1e-12));
        CHECK(std::abs(extension_total(twisted, r, opts.resolution) / r.total - 1.0) < 1e-10);
        CHECK(r.coeffs.rows() == a + 1);
        if (a == 0) CHECK(r.ratio == doctest::Approx(r.trivial_ratio).epsilon(1e-12));
        if (a == 4) {
            CHECK(r.ratio <= 1.0 + 1e-3);
            CHECK(r.ratio < r.trivial_ratio);
        }
        prev = r.total;
    }
}

TEST_CASE("extension constraints and the m=2 space") {
    const DomainFamily flat2 = DomainFamily::product(Domain::unit_disk(), 2);
    const TruncatedBasis zb(1, 2);
    Eigen::VectorXcd c(zb.size());
    c << 1.0, Complex(0.0, 0.5), 0.0;
    const ExtensionResult r = minimal_extension(flat2, HoloFunction(zb, c));
    CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.converged);

    ExtensionOptions low;
    low.z_degree = 1;
    CHECK_THROWS_AS(minimal_extension(flat2, HoloFunction::monomial(zb, 2), low), ValidationError);
    // Trailing zero coefficients above the fiber degree are harmless.
    CHECK_NOTHROW(minimal_extension(flat2, HoloFunction(zb, c), low));
    CHECK_THROWS_AS(minimal_extension(flat2, HoloFunction::zero(zb)), ValidationError);
}

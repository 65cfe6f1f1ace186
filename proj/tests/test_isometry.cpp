#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "pberg/isometry.hpp"

using namespace pberg;

namespace {

Point pt(Complex z) { return Point::Constant(1, z); }

const QuadratureRule& disk48() {
    static const QuadratureRule r = build_quadrature(Domain::unit_disk(), 48);
    return r;
}

IsometryOperator pullback(const Biholomorphism& f, double p, int source = 9, int target = 40) {
    return pullback_operator(f, p, TruncatedBasis(1, source), TruncatedBasis(1, target), Domain::unit_disk(),
                             disk48());
}

double sup_error(const RationalMap& F, const Biholomorphism& f, const std::vector<Point>& points) {
    double worst = 0.0;
    for (const auto& z : points) {
        const auto w = F(z);
        worst = std::max(worst, w ? std::abs((*w)(0) - f.map(z)(0)) : std::numeric_limits<double>::infinity());
    }
    return worst;
}

Domain annulus() {
    return Domain::indicator(pt({-1, -1}), pt({1, 1}),
                             [](const Point& z) { return std::abs(z(0)) > 0.5 && std::abs(z(0)) < 1.0; }, false);
}

}  // namespace

TEST_CASE("identity operator is the inclusion and reconstructs exactly") {
    const IsometryOperator op = pullback(Biholomorphism::identity(1), 1.0);
    CHECK(op.projection_residual < 1e-12);
    CHECK((op.matrix.topRows(10) - Eigen::MatrixXcd::Identity(10, 10)).norm() < 1e-12);
    const auto grid = disk_grid(0.0, 0.6, 4, 5, false);
    const Reconstruction rec = reconstruct_map(op, grid);
    CHECK(sup_error(rec.map, Biholomorphism::identity(1), grid) < 1e-12);
    const JacobianReport jac = verify_jacobian_relation(op, rec.map, 1.0, grid, column_battery(op, 10));
    CHECK(jac.max_residual < 1e-12);
    CHECK(jac.evaluated == 20);
    CHECK(jac.battery_size == 10);
}

TEST_CASE("roundtrip through Mobius and scaling maps") {
    const auto grid = disk_grid(0.0, 0.6, 4, 5, false);
    for (double p : {1.0, 1.5, 2.0}) {
        for (const Biholomorphism& f : {Biholomorphism::scaling(1, 0.5), Biholomorphism::mobius(0.3),
                                        Biholomorphism::mobius({0.0, -0.25})}) {
            CAPTURE(f.name);
            CAPTURE(p);
            const IsometryOperator op = pullback(f, p);
            const Reconstruction rec = reconstruct_map(op, grid);
            CHECK(sup_error(rec.map, f, grid) < 1e-6);
            const JacobianReport jac = verify_jacobian_relation(op, rec.map, p, grid, column_battery(op, 10));
            CHECK(jac.max_residual < 1e-4);
            CHECK(jac.excluded == 0);
        }
    }
}

TEST_CASE("pullback operators preserve p-norms") {
    const IsometryOperator op = pullback(Biholomorphism::mobius(0.3), 1.0);
    const BatteryReport rep = isometry_battery(op, disk48(), disk48(), 6);
    CHECK(rep.functions == 6);
    CHECK(rep.max_defect < 1e-6);
}

TEST_CASE("pullbacks compose contravariantly") {
    const Biholomorphism f = Biholomorphism::mobius(0.2);
    const Biholomorphism g = Biholomorphism::mobius({0.0, 0.3});
    const TruncatedBasis small(1, 4);
    Eigen::VectorXcd c(small.size());
    c << 1.0, Complex(0.5, -0.5), 0.25, 0.0, Complex(0.0, 0.1);
    const HoloFunction psi(small, c);
    for (double p : {1.0, 2.0}) {
        const IsometryOperator tg = pullback(g, p, 4, 40);
        const IsometryOperator tgf = pullback(g.after(f), p, 4, 40);
        const HoloFunction a = tg.apply(psi);
        const HoloFunction b = tgf.apply(psi);
        const double e = 2.0 / p;
        for (const auto& z : disk_grid(0.0, 0.5, 3, 6)) {
            // (T_f a)(z) = a(f(z)) J_f(z)^{2/p}, with 2/p an integer here.
            const Complex tfa = a(f.map(z)) * std::pow(f.jacobian(z), static_cast<int>(e));
            CHECK(std::abs(tfa - b(z)) < 1e-9);
        }
    }
}

TEST_CASE("branches of J^{2/p}") {
    const Domain ann = annulus();
    const QuadratureRule rule = build_quadrature(ann, 32);
    Eigen::VectorXcd jac(rule.size());
    for (Eigen::Index k = 0; k < rule.size(); ++k) jac(k) = rule.nodes(k, 0);
    // z^(4/3) cannot be continued around the hole; the integer power is fine.
    CHECK_THROWS_AS(jacobian_power(jac, 2.0 / 1.5, rule, ann), BranchError);
    const Eigen::VectorXcd sq = jacobian_power(jac, 2.0, rule, ann);
    CHECK((sq - jac.cwiseProduct(jac)).norm() < 1e-12);
    CHECK_THROWS_AS(pullback_operator(Biholomorphism::scaling(1, 0.5), 1.5, TruncatedBasis(1, 4),
                                      TruncatedBasis(1, 8), ann, rule),
                    BranchError);

    // On the disk a zero-free Jacobian has a continuous branch.
    Eigen::VectorXcd j1(disk48().size());
    for (Eigen::Index k = 0; k < j1.size(); ++k) j1(k) = 2.0 + disk48().nodes(k, 0);
    const Eigen::VectorXcd r = jacobian_power(j1, 2.0 / 1.5, disk48(), Domain::unit_disk());
    for (Eigen::Index k = 0; k < r.size(); k += 97) CHECK(std::abs(r(k) - std::pow(j1(k), 2.0 / 1.5)) < 1e-12);
    // A Jacobian winding around the origin is rejected.
    Eigen::VectorXcd wind(disk48().size());
    for (Eigen::Index k = 0; k < wind.size(); ++k) wind(k) = disk48().nodes(k, 0) + 0.1;
    CHECK_THROWS_AS(jacobian_power(wind, 0.5, disk48(), Domain::unit_disk()), BranchError);
}

TEST_CASE("reconstruction refuses unequal dimensions") {
    IsometryOperator op;
    op.source_basis = TruncatedBasis(2, 2);
    op.target_basis = TruncatedBasis(1, 5);
    op.matrix = Eigen::MatrixXcd::Zero(op.target_basis.size(), op.source_basis.size());
    CHECK_THROWS_AS(reconstruct_map(op, {}), RefusedError);
}

TEST_CASE("a forward operator is inverted before reconstruction") {
    const Complex a(0.3, 0.1);
    const Biholomorphism f = Biholomorphism::mobius(a);
    for (double p : {1.0, 2.0}) {
        // The forward operator of f is the pullback along the inverse map.
        IsometryOperator fwd = pullback(Biholomorphism::mobius(-a), p, 20, 60);
        fwd.direction = IsometryDirection::forward;
        const auto grid = disk_grid(0.0, 0.6, 4, 5, false);
        const Reconstruction rec = reconstruct_map(fwd, grid);
        CHECK(rec.condition < 1e10);
        CHECK(rec.solve_residual < 1e-5);
        CHECK(sup_error(rec.map, f, grid) < 1e-6);
    }
}

TEST_CASE("singular forward operators are conditioning errors") {
    IsometryOperator fwd = pullback(Biholomorphism::identity(1), 2.0, 6, 10);
    fwd.direction = IsometryDirection::forward;
    fwd.matrix.col(3).setZero();
    CHECK_THROWS_AS(reconstruct_map(fwd, {}), ConditioningError);
    ReconstructOptions tight;
    tight.condition_cap = 1.0 - 1e-9;
    fwd.matrix = Eigen::MatrixXcd::Identity(11, 7);
    fwd.matrix(0, 0) = 2.0;
    CHECK_THROWS_AS(reconstruct_map(fwd, {}, tight), ConditioningError);
}

TEST_CASE("points where the denominator vanishes are excluded") {
    const TruncatedBasis b(1, 2);
    RationalMap F;
    F.denominator = HoloFunction(b, Eigen::Vector3cd(-0.5, 1.0, 0.0));   // z - 1/2
    F.numerators.emplace_back(b, Eigen::Vector3cd(0.0, -0.5, 1.0));      // z (z - 1/2)
    F.exclusion_threshold = 1e-12;
    CHECK_FALSE(F.usable(pt(0.5)));
    CHECK_FALSE(F(pt(0.5)).has_value());
    CHECK_FALSE(F.jacobian(pt(0.5)).has_value());
    REQUIRE(F(pt(0.2)).has_value());
    CHECK(std::abs((*F(pt(0.2)))(0) - 0.2) < 1e-14);
    CHECK(std::abs(*F.jacobian(pt({0.1, 0.3})) - 1.0) < 1e-12);

    const IsometryOperator op = pullback(Biholomorphism::identity(1), 2.0);
    const std::vector<Point> points{pt(0.0), pt(0.5), pt({0.0, 0.4})};
    const JacobianReport rep = verify_jacobian_relation(op, F, 2.0, points, column_battery(op, 4));
    CHECK(rep.excluded == 1);
    CHECK(rep.evaluated == 2);
    CHECK(rep.max_residual < 1e-12);
}

TEST_CASE("unitary maps of the ball and grid helpers") {
    Eigen::Matrix2cd u;
    u << 0.0, 1.0, -1.0, 0.0;
    const Biholomorphism f = Biholomorphism::unitary(u);
    Point z(2);
    z << Complex(0.1, 0.2), Complex(-0.3, 0.0);
    CHECK(std::abs(f.jacobian(z) - 1.0) < 1e-14);
    CHECK(std::abs(f.map(z)(0) - z(1)) < 1e-15);
    CHECK_THROWS_AS(Biholomorphism::unitary(2.0 * u), ValidationError);
    CHECK_THROWS_AS(Biholomorphism::mobius(1.0), ValidationError);
    CHECK(disk_grid(0.0, 0.5, 3, 4).size() == 13);
    CHECK(disk_grid(0.0, 0.5, 3, 4, false).size() == 12);
}

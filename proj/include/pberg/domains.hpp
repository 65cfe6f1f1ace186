#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "pberg/types.hpp"

namespace pberg {

struct DiskShape {
    Complex center{0.0, 0.0};
    double radius = 1.0;
};

struct BallShape {
    int dim = 2;
    double radius = 1.0;
};

/// {x + iy : (x/a)^2 + (y/b)^2 < 1}
struct EllipseShape {
    double semi_a = 1.0;
    double semi_b = 1.0;
};

struct PolydiskShape {
    std::vector<double> radii;
};

/// Arbitrary region given by a membership predicate inside a box.
/// The box corners hold the low/high real and imaginary parts per coordinate.
struct IndicatorShape {
    Point box_lo;
    Point box_hi;
    std::function<bool(const Point&)> membership;
};

/// Fiber {|z| < radius} of a Hartogs family.
struct HartogsFiberShape {
    double radius = 1.0;
};

using DomainShape = std::variant<DiskShape, BallShape, EllipseShape, PolydiskShape, IndicatorShape,
                                 HartogsFiberShape>;

enum class DomainKind { disk, ball, ellipse, polydisk, indicator, hartogs_fiber };

/// A bounded domain in C^n with a membership test.
class Domain {
public:
    static Domain disk(Complex center, double radius);
    static Domain unit_disk() { return disk({0.0, 0.0}, 1.0); }
    static Domain ball(int dim, double radius);
    static Domain ellipse(double semi_a, double semi_b);
    static Domain polydisk(std::vector<double> radii);
    static Domain indicator(Point box_lo, Point box_hi, std::function<bool(const Point&)> membership,
                            bool simply_connected);
    static Domain hartogs_fiber(double radius);

    DomainKind kind() const noexcept { return static_cast<DomainKind>(shape_.index()); }
    const DomainShape& shape() const noexcept { return shape_; }
    int dim() const noexcept { return dim_; }
    bool simply_connected() const noexcept { return simply_connected_; }

    bool contains(const Point& z) const;

    /// Center of symmetry for the smooth kinds, box midpoint for indicators.
    Point center() const;

    /// Low and high corners of an axis-aligned box containing the domain.
    std::pair<Point, Point> bounding_box() const;

    /// Lebesgue volume when known in closed form.
    std::optional<double> exact_volume() const;

    /// The image r * Omega.
    Domain scaled(double r) const;

private:
    Domain(DomainShape shape, int dim, bool simply_connected)
        : shape_(std::move(shape)), dim_(dim), simply_connected_(simply_connected) {}

    DomainShape shape_;
    int dim_;
    bool simply_connected_;
};

/// Ring layout of a polar product rule in C^1. Node (ring, j) sits at
/// center + radii[ring] * exp(2 pi i j / angles) and has index ring * angles + j.
struct PolarLayout {
    Complex center{0.0, 0.0};
    std::vector<double> radii;
    int angles = 0;
};

/// Nodes and positive weights approximating integration against Lebesgue measure.
struct QuadratureRule {
    Eigen::MatrixXcd nodes;  // one row per node
    Eigen::VectorXd weights;
    double est_error = 0.0;
    std::optional<PolarLayout> polar;

    Eigen::Index size() const noexcept { return weights.size(); }
    int dim() const noexcept { return static_cast<int>(nodes.cols()); }
    Point node(Eigen::Index i) const { return nodes.row(i).transpose(); }
};

/// Gauss-Legendre nodes and weights on [a, b].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int count, double a, double b);

/// Builds a quadrature rule for the domain. Smooth kinds get polar/spherical product
/// rules with Gauss radial nodes and equispaced angles; indicators get a masked
/// midpoint rule on the bounding box.
QuadratureRule build_quadrature(const Domain& domain, int resolution);

/// Integral of a real integrand against the rule, accumulated with compensated summation.
double integrate(const QuadratureRule& rule, const std::function<double(const Point&)>& integrand);

/// Neumaier summation in extended precision.
class CompensatedSum {
public:
    void add(long double x) noexcept {
        const long double t = sum_ + x;
        if (fabsl(sum_) >= fabsl(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return static_cast<double>(sum_ + comp_); }

private:
    long double sum_ = 0.0L;
    long double comp_ = 0.0L;
};

}  // namespace pberg

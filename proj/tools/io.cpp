#include "io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace pberg::io {

const Json& require(const Json& j, const std::string& key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw ValidationError(where + ": missing '" + key + "'");
    return j.at(key);
}

double number(const Json& j, const std::string& key, const std::string& where) {
    const Json& v = require(j, key, where);
    if (!v.is_number()) throw ValidationError(where + ": '" + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ValidationError(where + ": '" + key + "' must be finite");
    return x;
}

double number_or(const Json& j, const std::string& key, double fallback, const std::string& where) {
    return j.is_object() && j.contains(key) ? number(j, key, where) : fallback;
}

int integer_or(const Json& j, const std::string& key, int fallback, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const Json& v = j.at(key);
    if (!v.is_number_integer()) throw ValidationError(where + ": '" + key + "' must be an integer");
    return v.get<int>();
}

Complex complex_from(const Json& j, const std::string& where) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ValidationError(where + ": expected a complex number [re, im]");
    }
    const Complex c(j[0].get<double>(), j[1].get<double>());
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw ValidationError(where + ": non-finite number");
    return c;
}

Json to_json(Complex c) { return Json::array({c.real(), c.imag()}); }

Point point_from(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ValidationError(where + ": expected a point [[re, im], ...]");
    // A bare [re, im] pair is accepted for points of C^1.
    if (j.size() == 2 && j[0].is_number()) return Point::Constant(1, complex_from(j, where));
    Point z(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) z(static_cast<Eigen::Index>(k)) = complex_from(j[k], where);
    return z;
}

Json to_json(const Point& z) {
    Json out = Json::array();
    for (Eigen::Index k = 0; k < z.size(); ++k) out.push_back(to_json(z(k)));
    return out;
}

Domain domain_from(const Json& j) {
    const std::string where = "domain";
    const Json& kind_j = require(j, "kind", where);
    if (!kind_j.is_string()) throw ValidationError("domain: 'kind' must be a string");
    const std::string kind = kind_j.get<std::string>();
    if (kind == "unit_disk") return Domain::unit_disk();
    if (kind == "disk") {
        const Complex c = j.contains("center") ? complex_from(j["center"], where) : Complex{};
        return Domain::disk(c, number_or(j, "radius", 1.0, where));
    }
    if (kind == "ball") return Domain::ball(integer_or(j, "dim", 2, where), number_or(j, "radius", 1.0, where));
    if (kind == "ellipse") return Domain::ellipse(number(j, "a", where), number(j, "b", where));
    if (kind == "polydisk") {
        const Json& r = require(j, "radii", where);
        if (!r.is_array()) throw ValidationError("domain: 'radii' must be an array");
        std::vector<double> radii;
        for (const auto& x : r) {
            if (!x.is_number()) throw ValidationError("domain: radii must be numbers");
            radii.push_back(x.get<double>());
        }
        return Domain::polydisk(radii);
    }
    if (kind == "hartogs_fiber") return Domain::hartogs_fiber(number(j, "radius", where));
    if (kind == "annulus") {
        const double inner = number(j, "inner", where);
        const double outer = number(j, "outer", where);
        if (!(inner > 0.0 && outer > inner)) throw ValidationError("domain: annulus needs 0 < inner < outer");
        return Domain::indicator(Point::Constant(1, Complex(-outer, -outer)), Point::Constant(1, Complex(outer, outer)),
                                 [inner, outer](const Point& z) {
                                     const double r = std::abs(z(0));
                                     return r > inner && r < outer;
                                 },
                                 false);
    }
    throw ValidationError("domain: unknown kind '" + kind + "'");
}

Json to_json(const Domain& d) {
    return std::visit(
        [&](const auto& s) -> Json {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, DiskShape>) {
                return {{"kind", "disk"}, {"center", to_json(s.center)}, {"radius", s.radius}};
            } else if constexpr (std::is_same_v<S, BallShape>) {
                return {{"kind", "ball"}, {"dim", d.dim()}, {"radius", s.radius}};
            } else if constexpr (std::is_same_v<S, EllipseShape>) {
                return {{"kind", "ellipse"}, {"a", s.semi_a}, {"b", s.semi_b}};
            } else if constexpr (std::is_same_v<S, PolydiskShape>) {
                return {{"kind", "polydisk"}, {"radii", s.radii}};
            } else if constexpr (std::is_same_v<S, HartogsFiberShape>) {
                return {{"kind", "hartogs_fiber"}, {"radius", s.radius}};
            } else {
                return {{"kind", "indicator"}, {"dim", d.dim()}, {"simply_connected", d.simply_connected()}};
            }
        },
        d.shape());
}

Weight weight_from(const Json& j) {
    if (j.is_null()) return Weight::zero();
    std::string kind;
    double scale = 1.0;
    if (j.is_string()) {
        kind = j.get<std::string>();
    } else {
        const Json& k = require(j, "kind", "weight");
        if (!k.is_string()) throw ValidationError("weight: 'kind' must be a string");
        kind = k.get<std::string>();
        scale = number_or(j, "scale", 1.0, "weight");
    }
    if (kind == "zero") return Weight::zero();
    if (kind == "abs2") return Weight::from([scale](const Point& z) { return scale * z.squaredNorm(); });
    if (kind == "re_z1") return Weight::from([scale](const Point& z) { return scale * z(0).real(); });
    throw ValidationError("weight: unknown kind '" + kind + "'");
}

namespace {

Json coefficient_array(const Eigen::VectorXcd& c) {
    Json out = Json::array();
    for (Eigen::Index k = 0; k < c.size(); ++k) out.push_back(to_json(c(k)));
    return out;
}

Eigen::VectorXcd coefficients_from(const Json& j, Eigen::Index expected, const std::string& where) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != expected) {
        throw ValidationError(where + ": expected " + std::to_string(expected) + " coefficients");
    }
    Eigen::VectorXcd c(expected);
    for (Eigen::Index k = 0; k < expected; ++k) c(k) = complex_from(j[static_cast<std::size_t>(k)], where);
    return c;
}

TruncatedBasis basis_from(const Json& j, const std::string& where) {
    const int dim = integer_or(j, "dim", 0, where);
    const int degree = integer_or(j, "degree", -1, where);
    if (dim < 1 || dim > 3 || degree < 0) throw ValidationError(where + ": needs dim in 1..3 and degree >= 0");
    return TruncatedBasis(dim, degree);
}

}  // namespace

HoloFunction holo_from(const Json& j) {
    const TruncatedBasis basis = basis_from(j, "function");
    return HoloFunction(basis, coefficients_from(require(j, "coeffs", "function"), basis.size(), "function"));
}

Json to_json(const HoloFunction& f) {
    return {{"dim", f.dim()},
            {"degree", f.basis().degree()},
            {"ordering", "graded-lex"},
            {"coeffs", coefficient_array(f.coeffs())}};
}

IsometryOperator operator_from(const Json& j) {
    const std::string where = "operator";
    IsometryOperator op;
    op.p = number(j, "p", where);
    if (!(op.p > 0.0)) throw ValidationError("operator: p must be positive");
    op.source_basis = basis_from(require(j, "source", where), "operator.source");
    op.target_basis = basis_from(require(j, "target", where), "operator.target");
    const Json& dir = require(j, "direction", where);
    if (dir == "pullback") {
        op.direction = IsometryDirection::pullback;
    } else if (dir == "forward") {
        op.direction = IsometryDirection::forward;
    } else {
        throw ValidationError("operator: direction must be 'pullback' or 'forward'");
    }
    const Eigen::Index rows = op.target_basis.size();
    const Eigen::Index cols = op.source_basis.size();
    const Eigen::VectorXcd flat = coefficients_from(require(j, "matrix", where), rows * cols, where);
    op.matrix.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) op.matrix(r, c) = flat(r * cols + c);
    }
    op.projection_residual = number_or(j, "projection_residual", 0.0, where);
    return op;
}

Json to_json(const IsometryOperator& op) {
    Json flat = Json::array();
    for (Eigen::Index r = 0; r < op.matrix.rows(); ++r) {
        for (Eigen::Index c = 0; c < op.matrix.cols(); ++c) flat.push_back(to_json(op.matrix(r, c)));
    }
    return {{"p", op.p},
            {"direction", op.direction == IsometryDirection::pullback ? "pullback" : "forward"},
            {"source", {{"dim", op.source_basis.dim()}, {"degree", op.source_basis.degree()}}},
            {"target", {{"dim", op.target_basis.dim()}, {"degree", op.target_basis.degree()}}},
            {"ordering", "graded-lex"},
            {"layout", "row-major"},
            {"projection_residual", op.projection_residual},
            {"matrix", std::move(flat)}};
}

Json to_json(const RationalMap& f) {
    Json nums = Json::array();
    for (const auto& n : f.numerators) nums.push_back(to_json(n));
    return {{"dim", f.dim()},
            {"denominator", to_json(f.denominator)},
            {"numerators", std::move(nums)},
            {"exclusion_threshold", f.exclusion_threshold}};
}

Biholomorphism map_from(const Json& j, int dim) {
    const std::string where = "map";
    const Json& k = require(j, "kind", where);
    if (!k.is_string()) throw ValidationError("map: 'kind' must be a string");
    const std::string kind = k.get<std::string>();
    if (kind == "identity") return Biholomorphism::identity(dim);
    if (kind == "scaling") return Biholomorphism::scaling(dim, complex_from(require(j, "factor", where), where));
    if (kind == "mobius") {
        if (dim != 1) throw ValidationError("map: mobius needs a domain in C");
        return Biholomorphism::mobius(complex_from(require(j, "a", where), where));
    }
    if (kind == "unitary") {
        const Json& m = require(j, "matrix", where);
        if (!m.is_array() || static_cast<int>(m.size()) != dim) throw ValidationError("map: unitary must be dim x dim");
        Eigen::MatrixXcd u(dim, dim);
        for (int r = 0; r < dim; ++r) {
            if (!m[static_cast<std::size_t>(r)].is_array() || static_cast<int>(m[static_cast<std::size_t>(r)].size()) != dim) {
                throw ValidationError("map: unitary must be dim x dim");
            }
            for (int c = 0; c < dim; ++c) {
                u(r, c) = complex_from(m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)], where);
            }
        }
        return Biholomorphism::unitary(u);
    }
    throw ValidationError("map: unknown kind '" + kind + "'");
}

DomainFamily family_from(const Json& j) {
    const std::string where = "family";
    const Json& fiber = require(j, "fiber", where);
    const Json& kind = require(fiber, "kind", "family.fiber");
    const int m = integer_or(j, "m", 1, where);
    Complex center{};
    double radius = 1.0;
    if (j.contains("parameter")) {
        const Json& par = j["parameter"];
        if (par.contains("center")) center = complex_from(par["center"], "family.parameter");
        radius = number_or(par, "radius", 1.0, "family.parameter");
    }
    std::optional<DomainFamily> family;
    if (kind == "hartogs") {
        const Json& u = require(fiber, "u", "family.fiber");
        if (!u.is_string()) throw ValidationError("family.fiber: 'u' must be a profile name");
        family = DomainFamily::hartogs(hartogs_profile(u.get<std::string>()), u.get<std::string>(), m, center, radius);
    } else if (kind == "product") {
        family = DomainFamily::product(domain_from(require(fiber, "domain", "family.fiber")), m, center, radius);
    } else {
        throw ValidationError("family.fiber: kind must be 'hartogs' or 'product'");
    }
    if (j.contains("weight")) {
        const Json& w = j["weight"];
        if (!w.is_string()) throw ValidationError("family: 'weight' must be a weight name");
        const bool psh = j.contains("declared_psh") ? j["declared_psh"].get<bool>() : true;
        family->with_weight(family_weight(w.get<std::string>()), w.get<std::string>(), psh);
    }
    return *family;
}

Json describe(const DomainFamily& f) {
    Json fiber = f.is_hartogs() ? Json{{"kind", "hartogs"}, {"u", f.u_tag()}}
                                : Json{{"kind", "product"}, {"domain", to_json(f.fiber(f.parameter_center()))}};
    return {{"fiber", std::move(fiber)},
            {"weight", f.weight_tag()},
            {"declared_psh", f.weight_declared_psh()},
            {"m", f.m()},
            {"parameter", {{"center", to_json(f.parameter_center())}, {"radius", f.parameter_radius()}}}};
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto dir = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
    std::filesystem::create_directories(dir);
    const auto tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void CsvTable::add(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw Error("CSV row width does not match the header");
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
        out << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out.str();
}

}  // namespace pberg::io

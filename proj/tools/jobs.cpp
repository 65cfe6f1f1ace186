#include "jobs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

namespace pberg::app {

using io::Json;

namespace {

struct Artifact {
    std::string name;
    std::string content;
};

struct JobResult {
    std::vector<Artifact> files;
    bool converged = true;
};

Json diagnostic(const std::string& level, const std::string& message) {
    return {{"level", level}, {"message", message}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// The solver block shared by every command.
struct SolverSpec {
    std::optional<double> p;
    int degree = -1;
    int resolution = -1;
    SolverOptions options;
};

SolverSpec solver_from(const Json& spec) {
    SolverSpec s;
    if (!spec.contains("solver")) return s;
    const Json& j = spec["solver"];
    if (!j.is_object()) throw ValidationError("solver: must be an object");
    if (j.contains("p")) {
        s.p = io::number(j, "p", "solver");
        if (!(*s.p > 0.0)) throw ValidationError("solver: p must be positive");
    }
    s.degree = io::integer_or(j, "degree", -1, "solver");
    s.resolution = io::integer_or(j, "resolution", -1, "solver");
    s.options.tol = io::number_or(j, "tol", 0.0, "solver");
    if (s.options.tol < 0.0) throw ValidationError("solver: tol must be non-negative");
    const int seed = io::integer_or(j, "seed", 0, "solver");
    if (seed < 0) throw ValidationError("solver: seed must be non-negative");
    s.options.seed = static_cast<std::uint64_t>(seed);
    s.options.starts = io::integer_or(j, "starts", s.options.starts, "solver");
    s.options.max_iterations = io::integer_or(j, "max_iterations", s.options.max_iterations, "solver");
    if (s.options.starts < 1 || s.options.max_iterations < 1) {
        throw ValidationError("solver: starts and max_iterations must be positive");
    }
    if (j.contains("path")) {
        const std::string path = j["path"].is_string() ? j["path"].get<std::string>() : "";
        if (path == "auto") {
            s.options.path = SolverPath::automatic;
        } else if (path == "dense") {
            s.options.path = SolverPath::dense;
        } else if (path == "polar") {
            s.options.path = SolverPath::polar;
        } else {
            throw ValidationError("solver: path must be 'auto', 'dense' or 'polar'");
        }
    }
    return s;
}

double require_p(const SolverSpec& s) {
    if (!s.p) throw ValidationError("solver: missing 'p'");
    return *s.p;
}

int default_resolution(int dim) { return dim == 1 ? 32 : (dim == 2 ? 16 : 8); }

Point point_in(const Json& j, const Domain& domain, const std::string& where) {
    const Point z = io::point_from(j, where);
    if (z.size() != domain.dim()) throw ValidationError(where + ": point dimension differs from the domain");
    if (!domain.contains(z)) throw ValidationError(where + ": point is not interior to the domain");
    return z;
}

std::string weight_tag(const Json& spec) {
    if (!spec.contains("weight")) return "zero";
    const Json& w = spec["weight"];
    return w.is_string() ? w.get<std::string>() : w.dump();
}

Json result_json(const ExtremalResult& r) {
    return {{"kernel_value", r.kernel_value}, {"converged", r.converged},   {"iterations", r.iterations},
            {"stationarity", r.stationarity}, {"start_spread", r.start_spread}, {"path", r.path},
            {"degree", r.degree},             {"tol", r.tol}};
}

JobResult kernel_job(const Json& spec) {
    const Domain domain = io::domain_from(io::require(spec, "domain", "spec"));
    const Weight weight = io::weight_from(spec.contains("weight") ? spec["weight"] : Json());
    const SolverSpec s = solver_from(spec);
    const double p = require_p(s);
    const Point z = point_in(io::require(spec, "point", "spec"), domain, "point");
    const TruncatedBasis basis(domain.dim(), s.degree >= 0 ? s.degree : TruncatedBasis::default_degree(domain.dim()));
    const int res = s.resolution > 0 ? s.resolution : default_resolution(domain.dim());

    const QuadratureRule rule = build_quadrature(domain, res);
    const ExtremalResult r = p_extremal(basis, rule, weight, p, z, s.options);
    Json diags = Json::array();
    if (!r.converged) {
        diags.push_back(diagnostic("warning", "solver stopped above tolerance (stationarity " +
                                                  io::format_number(r.stationarity) + ", start spread " +
                                                  io::format_number(r.start_spread) + ")"));
    }
    Json out = {{"command", "kernel"},
                {"domain", io::to_json(domain)},
                {"weight", weight_tag(spec)},
                {"p", p},
                {"point", io::to_json(z)},
                {"resolution", res},
                {"quadrature", {{"nodes", rule.size()}, {"est_error", rule.est_error}}}};
    out.update(result_json(r));
    out["extremal"] = io::to_json(r.extremal);
    out["diagnostics"] = std::move(diags);
    return {{{"kernel.json", dump(out)}}, r.converged};
}

// Points c + s_k d on the ray from c along d whose distance to the boundary along the ray is 2^{-k}.
std::vector<Point> exhaustion_path(const Domain& domain, const Json& j) {
    const int k_min = io::integer_or(j, "k_min", 1, "exhaustion");
    const int k_max = io::integer_or(j, "k_max", 5, "exhaustion");
    if (k_min < 0 || k_max < k_min || k_max > 40) throw ValidationError("exhaustion: need 0 <= k_min <= k_max <= 40");
    const Point c = j.contains("from") ? point_in(j["from"], domain, "exhaustion.from") : domain.center();
    Point d = j.contains("direction") ? io::point_from(j["direction"], "exhaustion.direction")
                                      : Point(Point::Unit(domain.dim(), 0).cast<Complex>());
    if (d.size() != domain.dim() || !(d.norm() > 0.0)) throw ValidationError("exhaustion: bad direction");
    d /= d.norm();
    double hi = 1.0;
    while (domain.contains(Point(c + hi * d))) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (domain.contains(Point(c + mid * d)) ? lo : hi) = mid;
    }
    std::vector<Point> out;
    for (int k = k_min; k <= k_max; ++k) {
        const double s = lo - std::ldexp(1.0, -k);
        if (!(s >= 0.0)) throw ValidationError("exhaustion: boundary is closer than 2^-k_min along the ray");
        out.emplace_back(c + s * d);
    }
    return out;
}

JobResult profile_job(const Json& spec) {
    const Domain domain = io::domain_from(io::require(spec, "domain", "spec"));
    const Weight weight = io::weight_from(spec.contains("weight") ? spec["weight"] : Json());
    const SolverSpec s = solver_from(spec);
    const double p = require_p(s);
    std::vector<Point> path;
    if (spec.contains("points")) {
        const Json& pts = spec["points"];
        if (!pts.is_array() || pts.empty()) throw ValidationError("points: expected a non-empty list");
        for (const auto& pj : pts) path.push_back(point_in(pj, domain, "points"));
    } else if (spec.contains("exhaustion")) {
        path = exhaustion_path(domain, spec["exhaustion"]);
    } else {
        throw ValidationError("spec: profile needs 'points' or 'exhaustion'");
    }
    const TruncatedBasis basis(domain.dim(), s.degree >= 0 ? s.degree : TruncatedBasis::default_degree(domain.dim()));
    const int res = s.resolution > 0 ? s.resolution : default_resolution(domain.dim());
    const QuadratureRule rule = build_quadrature(domain, res);
    const KernelProfile prof = kernel_profile(domain, p, path, basis, rule, weight, s.options);

    std::vector<std::string> header{"index"};
    for (int j = 0; j < domain.dim(); ++j) {
        header.push_back("z" + std::to_string(j + 1) + "_re");
        header.push_back("z" + std::to_string(j + 1) + "_im");
    }
    for (const char* h : {"kernel_value", "converged", "stationarity", "iterations", "increased", "tol"}) {
        header.emplace_back(h);
    }
    io::CsvTable csv(header);
    bool converged = true;
    Json diags = Json::array();
    for (std::size_t k = 0; k < prof.points.size(); ++k) {
        const auto& pt = prof.points[k];
        std::vector<std::string> row{std::to_string(k)};
        for (Eigen::Index j = 0; j < pt.z.size(); ++j) {
            row.push_back(io::format_number(pt.z(j).real()));
            row.push_back(io::format_number(pt.z(j).imag()));
        }
        row.push_back(io::format_number(pt.result.kernel_value));
        row.emplace_back(pt.result.converged ? "true" : "false");
        row.push_back(io::format_number(pt.result.stationarity));
        row.push_back(std::to_string(pt.result.iterations));
        row.emplace_back(k == 0 ? "" : (pt.increased ? "true" : "false"));
        row.push_back(io::format_number(pt.result.tol));
        csv.add(std::move(row));
        if (!pt.result.converged) {
            converged = false;
            diags.push_back(diagnostic("warning", "point " + std::to_string(k) + " did not converge"));
        }
    }
    if (!prof.strictly_increasing) diags.push_back(diagnostic("info", "profile is not strictly increasing"));
    const Json summary = {{"command", "profile"},
                          {"domain", io::to_json(domain)},
                          {"weight", weight_tag(spec)},
                          {"p", p},
                          {"degree", basis.degree()},
                          {"resolution", res},
                          {"points", prof.points.size()},
                          {"strictly_increasing", prof.strictly_increasing},
                          {"converged", converged},
                          {"tol", prof.points.empty() ? 0.0 : prof.points.front().result.tol},
                          {"diagnostics", diags}};
    return {{{"profile.csv", csv.str()}, {"profile.json", dump(summary)}}, converged};
}

std::vector<Point> verification_points(const Domain& domain, double radius, int count) {
    std::vector<Point> out;
    const Point c = domain.center();
    if (domain.dim() == 1) {
        const int per_ring = 5;
        const int rings = std::max(1, (count + per_ring - 1) / per_ring);
        for (auto& z : disk_grid(c(0), radius, rings, per_ring, false)) {
            if (static_cast<int>(out.size()) < count && domain.contains(z)) out.push_back(z);
        }
        return out;
    }
    std::mt19937_64 rng(0);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    const int n = domain.dim();
    for (int attempt = 0; static_cast<int>(out.size()) < count && attempt < 100 * count; ++attempt) {
        Point d(n);
        for (int j = 0; j < n; ++j) d(j) = Complex(normal(rng), normal(rng));
        const Point z = c + d / d.norm() * (radius * std::pow(uniform(rng), 1.0 / (2.0 * n)));
        if (domain.contains(z)) out.push_back(z);
    }
    return out;
}

JobResult map_job(const Json& spec) {
    const Domain omega_1 = io::domain_from(io::require(spec, "domain", "spec"));
    const int n = omega_1.dim();
    const SolverSpec s = solver_from(spec);
    const Json solver = spec.contains("solver") ? spec["solver"] : Json::object();
    const Json verify = spec.contains("verify") ? spec["verify"] : Json::object();
    const double radius = io::number_or(verify, "radius", 0.6, "verify");
    const int point_count = io::integer_or(verify, "points", 20, "verify");
    const int functions = io::integer_or(verify, "functions", 10, "verify");
    const double tol = io::number_or(verify, "tol", 1e-4, "verify");
    const double roundtrip_tol = io::number_or(verify, "roundtrip_tol", 1e-6, "verify");
    const double delta = io::number_or(verify, "delta", 1e-6, "verify");
    const double tau_rel = io::number_or(spec, "tau_relative", 1e-8, "spec");
    if (radius <= 0.0 || point_count < 1 || functions < 1 || tol <= 0.0) {
        throw ValidationError("verify: radius, points, functions and tol must be positive");
    }

    std::optional<Biholomorphism> f;
    std::optional<Domain> omega_2;
    IsometryOperator op;
    Json map_desc;
    if (spec.contains("map")) {
        f = io::map_from(spec["map"], n);
        map_desc = spec["map"];
        const std::string kind = spec["map"]["kind"].get<std::string>();
        if (spec.contains("target_domain")) {
            omega_2 = io::domain_from(spec["target_domain"]);
        } else if (kind == "identity" || kind == "mobius" || kind == "unitary") {
            omega_2 = omega_1;
        } else if (kind == "scaling") {
            omega_2 = omega_1.scaled(std::abs(io::complex_from(spec["map"]["factor"], "map")));
        }
    }
    const double p = spec.contains("operator") && !s.p ? io::number(spec["operator"], "p", "operator") : require_p(s);
    const int res = s.resolution > 0 ? s.resolution : (n == 1 ? 48 : default_resolution(n));
    const QuadratureRule rule_1 = build_quadrature(omega_1, res);
    if (spec.contains("operator")) {
        op = io::operator_from(spec["operator"]);
        if (std::abs(op.p - p) > 1e-14 * p) throw ValidationError("operator: p differs from solver.p");
    } else {
        if (!f) throw ValidationError("spec: map job needs 'map' or 'operator'");
        const int src = io::integer_or(solver, "source_degree", n == 1 ? 9 : 3, "solver");
        const int tgt = io::integer_or(solver, "target_degree", n == 1 ? 40 : TruncatedBasis::default_degree(n), "solver");
        if (src < 1 || tgt < src) throw ValidationError("solver: need 1 <= source_degree <= target_degree");
        PullbackOptions popts;
        popts.residual_cap = io::number_or(solver, "residual_cap", popts.residual_cap, "solver");
        op = pullback_operator(*f, p, TruncatedBasis(n, src), TruncatedBasis(n, tgt), omega_1, rule_1, popts);
    }
    const TruncatedBasis& basis_1 = op.direction == IsometryDirection::pullback ? op.target_basis : op.source_basis;
    if (basis_1.dim() != n) throw ValidationError("operator: Omega_1 basis dimension differs from the domain");

    const std::vector<Point> points = verification_points(omega_1, radius, point_count);
    ReconstructOptions ropts;
    ropts.tau_relative = tau_rel;
    const Reconstruction rec = reconstruct_map(op, points, ropts);

    std::vector<HoloFunction> battery;
    if (op.direction == IsometryDirection::pullback) {
        battery = column_battery(op, functions);
    } else {
        for (Eigen::Index k = 0; k < std::min<Eigen::Index>(functions, basis_1.size()); ++k) {
            battery.push_back(HoloFunction::monomial(basis_1, k));
        }
    }
    const JacobianReport jac = verify_jacobian_relation(op, rec.map, p, points, battery, delta);

    Json diags = Json::array();
    bool converged = jac.max_residual <= tol;
    if (!converged) diags.push_back(diagnostic("warning", "Jacobian relation residual exceeds tol"));
    if (jac.excluded > 0) {
        diags.push_back(diagnostic("info", std::to_string(jac.excluded) + " points excluded near zeros of phi_0"));
    }
    Json out = {{"command", "map"}, {"domain", io::to_json(omega_1)}, {"p", p}, {"resolution", res}};
    if (f) out["map_spec"] = map_desc;
    out["tol"] = tol;
    out["reconstructed_map"] = io::to_json(rec.map);
    out["inverse_condition"] = rec.condition;
    out["inverse_residual"] = rec.solve_residual;
    out["projection_residual"] = op.projection_residual;
    out["jacobian_relation"] = {{"max_residual", jac.max_residual},   {"mean_residual", jac.mean_residual},
                                {"points", jac.evaluated},            {"excluded", jac.excluded},
                                {"functions", jac.battery_size},      {"solve_residual", jac.solve_residual},
                                {"delta_relative", delta}};
    if (f) {
        double sup = 0.0;
        for (const auto& z : points) {
            if (const auto w = rec.map(z)) sup = std::max(sup, (*w - f->map(z)).cwiseAbs().maxCoeff());
        }
        out["roundtrip"] = {{"sup_error", sup}, {"tol", roundtrip_tol}, {"radius", radius}};
        if (sup > roundtrip_tol) {
            converged = false;
            diags.push_back(diagnostic("warning", "reconstructed map differs from the input map beyond roundtrip_tol"));
        }
    }
    if (omega_2 && op.direction == IsometryDirection::pullback) {
        const BatteryReport b = isometry_battery(op, rule_1, build_quadrature(*omega_2, res), functions);
        out["isometry_battery"] = {{"max_defect", b.max_defect}, {"mean_defect", b.mean_defect}, {"functions", b.functions}};
    } else {
        diags.push_back(diagnostic("info", "isometry battery skipped: target domain unknown or operator is forward"));
    }
    out["converged"] = converged;
    out["diagnostics"] = std::move(diags);
    return {{{"map.json", dump(out)}, {"operator.json", dump(io::to_json(op))}}, converged};
}

JobResult family_job(const Json& spec) {
    const DomainFamily family = io::family_from(io::require(spec, "family", "spec"));
    const SolverSpec s = solver_from(spec);
    if (s.p) throw ValidationError("solver: family jobs take m from the family, not p");
    const int n = family.fiber_dim();
    const Point z = spec.contains("point") ? io::point_from(spec["point"], "point") : Point(Point::Zero(n));
    if (z.size() != n) throw ValidationError("point: dimension differs from the fiber");
    const TruncatedBasis basis(n, s.degree >= 0 ? s.degree : TruncatedBasis::default_degree(n));
    const int res = s.resolution > 0 ? s.resolution : default_resolution(n);

    const Json probe = io::require(spec, "probe", "spec");
    std::vector<Complex> centers;
    std::vector<double> radii;
    for (const auto& c : io::require(probe, "centers", "probe")) centers.push_back(io::complex_from(c, "probe.centers"));
    for (const auto& r : io::require(probe, "radii", "probe")) {
        if (!r.is_number() || !(r.get<double>() > 0.0)) throw ValidationError("probe: radii must be positive numbers");
        radii.push_back(r.get<double>());
    }
    if (centers.empty() || radii.empty()) throw ValidationError("probe: needs at least one center and one radius");
    const double spacing = io::number_or(probe, "spacing", 0.075, "probe");
    const int angles = io::integer_or(probe, "angles", 128, "probe");
    if (!(spacing > 0.0) || angles < 64) throw ValidationError("probe: spacing > 0 and angles >= 64 required");
    double rmax = 0.0;
    for (double r : radii) rmax = std::max(rmax, r);
    for (const Complex c : centers) {
        if (!(std::abs(c - family.parameter_center()) + rmax < family.parameter_radius())) {
            throw ValidationError("probe: circles must lie inside the parameter disk");
        }
    }

    std::string field_kind = "log_kernel";
    if (spec.contains("field")) {
        if (!spec["field"].is_string()) throw ValidationError("field: must be 'log_kernel' or 'log_dual_norm'");
        field_kind = spec["field"].get<std::string>();
    }
    HoloFunctional xi;
    if (field_kind == "log_dual_norm") {
        if (spec.contains("functional")) {
            for (const auto& a : spec["functional"]) {
                const Point zp = io::point_from(io::require(a, "point", "functional"), "functional");
                if (zp.size() != n) throw ValidationError("functional: atom dimension differs from the fiber");
                const Complex coef = a.contains("coefficient") ? io::complex_from(a["coefficient"], "functional")
                                                               : Complex(1.0, 0.0);
                xi.atoms.push_back({[zp](Complex) { return zp; }, [coef](Complex) { return coef; }});
            }
        } else {
            xi = HoloFunctional::delta(z);
        }
    } else if (field_kind != "log_kernel") {
        throw ValidationError("field: must be 'log_kernel' or 'log_dual_norm'");
    }

    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (const Complex c : centers) {
        xlo = std::min(xlo, c.real() - rmax);
        xhi = std::max(xhi, c.real() + rmax);
        ylo = std::min(ylo, c.imag() - rmax);
        yhi = std::max(yhi, c.imag() + rmax);
    }
    const Complex origin(xlo - spacing, ylo - spacing);
    const int nx = std::max(4, static_cast<int>(std::ceil((xhi - xlo) / spacing)) + 3);
    const int ny = std::max(4, static_cast<int>(std::ceil((yhi - ylo) / spacing)) + 3);

    std::atomic<int> unconverged{0};
    std::atomic<int> outside{0};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto value = [&](Complex t) -> double {
        if (!family.in_parameter_domain(t)) {
            ++outside;
            return nan;
        }
        if (field_kind == "log_kernel") {
            if (!family.fiber(t).contains(z)) {
                ++outside;
                return nan;
            }
            const ExtremalResult r = fiber_kernel(family, t, z, basis, res, s.options);
            if (!r.converged) ++unconverged;
            return std::log(r.kernel_value);
        }
        const Domain fiber = family.fiber(t);
        for (const auto& a : xi.atoms) {
            if (!fiber.contains(a.point(t))) {
                ++outside;
                return nan;
            }
        }
        const DualNormResult d = dual_norm(family, xi, t, basis, res, s.options);
        if (!d.converged) ++unconverged;
        return std::log(d.value);
    };
    const TabulatedField field = tabulate(value, origin, spacing, nx, ny);

    const QuadratureRule ref_rule = build_quadrature(family.fiber(family.parameter_center()), res);
    const double tol = io::number_or(probe, "tol", default_probe_tolerance(ref_rule, s.options), "probe");
    const ProbeReport rep = psh_probe(field, centers, radii, tol, angles);

    io::CsvTable csv({"t_center_re", "t_center_im", "radius", "field_center", "circle_mean", "margin", "violated", "tol"});
    for (const auto& r : rep.probes) {
        csv.add({io::format_number(r.center.real()), io::format_number(r.center.imag()), io::format_number(r.radius),
                 io::format_number(r.field_center), io::format_number(r.circle_mean), io::format_number(r.margin),
                 r.violated ? "true" : "false", io::format_number(rep.tol)});
    }
    Json diags = Json::array();
    const bool converged = unconverged.load() == 0;
    if (!converged) {
        diags.push_back(diagnostic("warning", std::to_string(unconverged.load()) + " field solves did not converge"));
    }
    if (rep.skipped > 0) {
        diags.push_back(diagnostic("warning", std::to_string(rep.skipped) + " probes skipped: circle leaves the field grid"));
    }
    if (outside.load() > 0) {
        diags.push_back(diagnostic("info", std::to_string(outside.load()) + " grid nodes outside the family left unset"));
    }
    const Json summary = {{"command", "family"},
                          {"family", io::describe(family)},
                          {"field", field_kind},
                          {"point", io::to_json(z)},
                          {"degree", basis.degree()},
                          {"resolution", res},
                          {"grid", {{"origin", io::to_json(origin)}, {"spacing", spacing}, {"nx", nx}, {"ny", ny}}},
                          {"angles", angles},
                          {"probes", rep.probes.size()},
                          {"violations", rep.violations},
                          {"skipped", rep.skipped},
                          {"min_margin", rep.min_margin},
                          {"tol", rep.tol},
                          {"converged", converged},
                          {"diagnostics", diags}};
    return {{{"probe.csv", csv.str()}, {"family.json", dump(summary)}}, converged};
}

JobResult extend_job(const Json& spec) {
    const DomainFamily family = io::family_from(io::require(spec, "family", "spec"));
    const SolverSpec s = solver_from(spec);
    if (s.p) throw ValidationError("solver: extension jobs take m from the family, not p");
    const int n = family.fiber_dim();
    const HoloFunction u = spec.contains("u") ? io::holo_from(spec["u"]) : HoloFunction::monomial(TruncatedBasis(n, 0), 0);
    if (u.dim() != n) throw ValidationError("u: dimension differs from the fiber");
    ExtensionOptions eopts;
    if (spec.contains("extension")) {
        const Json& e = spec["extension"];
        eopts.t_degree = io::integer_or(e, "t_degree", eopts.t_degree, "extension");
        eopts.z_degree = io::integer_or(e, "z_degree", eopts.z_degree, "extension");
        eopts.resolution = io::integer_or(e, "resolution", eopts.resolution, "extension");
    }
    eopts.solver = s.options;
    const ExtensionResult r = minimal_extension(family, u, eopts);
    const double recomputed = extension_total(family, r, eopts.resolution);

    Json coeffs = Json::array();
    for (Eigen::Index a = 0; a < r.coeffs.rows(); ++a) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < r.coeffs.cols(); ++k) row.push_back(io::to_json(r.coeffs(a, k)));
        coeffs.push_back(std::move(row));
    }
    Json diags = Json::array();
    if (!r.converged) diags.push_back(diagnostic("warning", "extension solver stopped above tolerance"));
    if (r.ratio > 1.0 + r.tol) diags.push_back(diagnostic("info", "ratio exceeds 1 + tol"));
    const Json out = {{"command", "extend"},
                      {"family", io::describe(family)},
                      {"u", io::to_json(u)},
                      {"t_degree", r.t_degree},
                      {"z_degree", r.z_basis.degree()},
                      {"resolution", eopts.resolution},
                      {"total", r.total},
                      {"fiber_value", r.fiber_value},
                      {"ratio", r.ratio},
                      {"trivial_ratio", r.trivial_ratio},
                      {"recomputed_total", recomputed},
                      {"converged", r.converged},
                      {"stationarity", r.stationarity},
                      {"tol", r.tol},
                      {"coeffs_layout", "rows t^a, columns graded-lex z basis"},
                      {"coeffs", std::move(coeffs)},
                      {"diagnostics", diags}};
    return {{{"extension.json", dump(out)}}, r.converged};
}

}  // namespace

const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"kernel", "profile", "map", "family", "extend"};
    return names;
}

JobOutcome run_job(const std::string& command, const Json& spec, const std::filesystem::path& out_dir) {
    JobOutcome outcome;
    auto refuse = [&](const std::string& kind, const std::string& message) {
        outcome.code = exit_refused;
        outcome.message = message;
        const Json report = {{"command", command},
                             {"status", "refused"},
                             {"reason", kind},
                             {"diagnostics", Json::array({diagnostic("error", message)})}};
        const auto path = out_dir / (command + ".json");
        io::write_atomic(path, dump(report));
        outcome.artifacts.push_back(path);
    };
    try {
        if (!spec.is_object()) throw ValidationError("spec must be a JSON object");
        if (spec.contains("command") && spec["command"] != command) {
            throw ValidationError("spec names a different command than the command line");
        }
        JobResult result;
        if (command == "kernel") {
            result = kernel_job(spec);
        } else if (command == "profile") {
            result = profile_job(spec);
        } else if (command == "map") {
            result = map_job(spec);
        } else if (command == "family") {
            result = family_job(spec);
        } else if (command == "extend") {
            result = extend_job(spec);
        } else {
            throw ValidationError("unknown command '" + command + "'");
        }
        for (const auto& a : result.files) {
            const auto path = out_dir / a.name;
            io::write_atomic(path, a.content);
            outcome.artifacts.push_back(path);
        }
        outcome.code = result.converged ? exit_ok : exit_nonconvergence;
        outcome.message = result.converged ? "ok" : "solver did not converge; artifacts carry converged=false";
    } catch (const ValidationError& e) {
        outcome.code = exit_validation;
        outcome.message = e.what();
    } catch (const nlohmann::json::exception& e) {
        outcome.code = exit_validation;
        outcome.message = std::string("spec: ") + e.what();
    } catch (const BranchError& e) {
        refuse("branch", e.what());
    } catch (const ConditioningError& e) {
        refuse("conditioning", e.what());
    } catch (const RefusedError& e) {
        refuse("precondition", e.what());
    } catch (const SolverError& e) {
        outcome.code = exit_nonconvergence;
        outcome.message = e.what();
    }
    return outcome;
}

JobOutcome run_job_file(const std::string& command, const std::filesystem::path& spec_path,
                        const std::filesystem::path& out_dir) {
    std::ifstream in(spec_path);
    if (!in) return {exit_validation, {}, "cannot read spec file " + spec_path.string()};
    Json spec;
    try {
        spec = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        return {exit_validation, {}, std::string("spec is not valid JSON: ") + e.what()};
    }
    return run_job(command, spec, out_dir);
}

}  // namespace pberg::app

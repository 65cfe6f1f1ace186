#include "checks.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <sstream>
#include <unistd.h>

#include "jobs.hpp"
#include "pberg/extremal.hpp"
#include "pberg/isometry.hpp"
#include "pberg/variation.hpp"

namespace pberg::app {

namespace {

constexpr double pi = std::numbers::pi;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double x) {
    std::ostringstream s;
    s.precision(3);
    s << x;
    return s.str();
}

// Collects sub-assertions; the detail keeps the worst figures and every failure.
class Battery {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok) failures_.push_back(what);
    }
    void note(const std::string& what) { notes_.push_back(what); }
    bool passed() const { return failures_.empty(); }
    std::string detail() const {
        std::string out;
        for (const auto& f : failures_) out += (out.empty() ? "FAILED " : "; FAILED ") + f;
        for (const auto& n : notes_) out += (out.empty() ? "" : "; ") + n;
        return out;
    }

private:
    std::vector<std::string> failures_;
    std::vector<std::string> notes_;
};

Point pt(Complex z) { return Point::Constant(1, z); }

double disk_kernel(double p, Complex a) { return std::pow(pi, -2.0 / p) * std::pow(1.0 - std::norm(a), -4.0 / p); }

void disk_center(Battery& b) {
    const QuadratureRule rule = build_quadrature(Domain::unit_disk(), 32);
    const TruncatedBasis basis(1, 20);
    double worst = 0.0, slowest = 0.0;
    for (double p : {0.5, 1.0, 1.5, 3.0}) {
        const auto t0 = std::chrono::steady_clock::now();
        const ExtremalResult r = p_extremal(basis, rule, Weight::zero(), p, pt(0.0));
        const double dt = seconds_since(t0);
        const double err = std::abs(r.kernel_value / std::pow(pi, -2.0 / p) - 1.0);
        b.expect(err <= 1e-3, "p=" + num(p) + " relative error " + num(err));
        b.expect(dt <= 10.0, "p=" + num(p) + " took " + num(dt) + "s");
        worst = std::max(worst, err);
        slowest = std::max(slowest, dt);
    }
    b.note("worst relative error " + num(worst) + ", slowest p " + num(slowest) + "s");
}

void mobius_covariance(Battery& b) {
    const TruncatedBasis basis(1, 30);
    const QuadratureRule rule = build_quadrature(Domain::unit_disk(), 48);
    const ExtremalResult r = p_extremal(basis, rule, Weight::zero(), 1.0, pt(0.5));
    const double oracle = std::pow(pi, -2.0) * std::pow(0.75, -4.0);
    const double err = std::abs(r.kernel_value / oracle - 1.0);
    b.expect(err <= 5e-3, "B(0.5) relative error " + num(err));
    b.note("B_1(0.5) = " + num(r.kernel_value) + " (rel " + num(err) + ")");

    const TruncatedBasis small(1, 20);
    double worst = 0.0;
    for (double p : {1.0, 3.0}) {
        const double base = p_extremal(small, build_quadrature(Domain::unit_disk(), 32), Weight::zero(), p,
                                       pt(0.3)).kernel_value;
        for (double s : {0.5, 2.0}) {
            const double scaled = p_extremal(small, build_quadrature(Domain::disk(0.0, s), 32), Weight::zero(), p,
                                             pt(0.3 * s)).kernel_value;
            const double exponent = std::log(base / scaled) / std::log(s);
            const double dev = std::abs(exponent - 4.0 / p);
            worst = std::max(worst, dev);
            b.expect(dev <= 1e-8, "scaling exponent at p=" + num(p) + ", r=" + num(s) + " off by " + num(dev));
        }
    }
    b.note("scaling exponent matches 4/p to " + num(worst));
}

void p2_closed_forms(Battery& b) {
    const auto t0 = std::chrono::steady_clock::now();
    const TruncatedBasis basis(1, 40);
    const QuadratureRule rule = build_quadrature(Domain::unit_disk(), 48);
    double worst_gram = 0.0, worst_agree = 0.0;
    for (Complex z : {Complex(0.0), Complex(0.3), Complex(0.5), Complex(0.7), Complex(0.0, 0.7), Complex(-0.5, 0.3),
                      Complex(0.49, -0.49)}) {
        const double g = gram_kernel(basis, rule, Weight::zero(), pt(z));
        const double exact = 1.0 / (pi * std::pow(1.0 - std::norm(z), 2));
        const double e = std::abs(g / exact - 1.0);
        const double k = p_extremal(basis, rule, Weight::zero(), 2.0, pt(z)).kernel_value;
        const double a = std::abs(k / g - 1.0);
        worst_gram = std::max(worst_gram, e);
        worst_agree = std::max(worst_agree, a);
        b.expect(e <= 1e-6, "disk gram kernel error " + num(e));
        b.expect(a <= 1e-6, "p=2 extremal vs gram " + num(a));
    }
    const QuadratureRule ball = build_quadrature(Domain::ball(2, 1.0), 16);
    const double g = gram_kernel(TruncatedBasis(2, 6), ball, Weight::zero(), Point::Zero(2));
    const double e = std::abs(g / (2.0 / (pi * pi)) - 1.0);
    b.expect(e <= 1e-6, "ball centre kernel error " + num(e));
    const double dt = seconds_since(t0);
    b.expect(dt <= 30.0, "took " + num(dt) + "s");
    b.note("disk " + num(worst_gram) + ", ball " + num(e) + ", extremal vs gram " + num(worst_agree));
}

void decreasing(Battery& b) {
    const std::vector<Complex> points{0.0, 0.3, Complex(0.0, 0.5), Complex(-0.4, 0.2), 0.6};
    double least = std::numeric_limits<double>::infinity();
    auto compare = [&](const Domain& small, const Domain& large, int degree, const std::string& name) {
        const TruncatedBasis basis(1, degree);
        const QuadratureRule rs = build_quadrature(small, 48);
        const QuadratureRule rl = build_quadrature(large, 48);
        for (double p : {1.0, 2.0}) {
            for (Complex z : points) {
                const ExtremalResult ks = p_extremal(basis, rs, Weight::zero(), p, pt(z));
                const ExtremalResult kl = p_extremal(basis, rl, Weight::zero(), p, pt(z));
                const double margin = (ks.kernel_value - kl.kernel_value) / kl.kernel_value;
                least = std::min(least, margin - ks.tol - kl.tol);
                b.expect(margin > ks.tol + kl.tol, name + " p=" + num(p) + " margin " + num(margin));
            }
        }
    };
    compare(Domain::disk(0.0, 0.8), Domain::unit_disk(), 30, "0.8D in D");
    compare(Domain::unit_disk(), Domain::ellipse(2.0, 1.5), 20, "D in ellipse");
    b.note("smallest margin beyond tolerance " + num(least));
}

void isometry_roundtrip(Battery& b) {
    const auto t0 = std::chrono::steady_clock::now();
    const Domain disk = Domain::unit_disk();
    const QuadratureRule rule = build_quadrature(disk, 48);
    const std::vector<Point> grid = disk_grid(0.0, 0.6, 4, 5, false);
    double worst_map = 0.0, worst_jac = 0.0;
    for (double p : {1.0, 2.0}) {
        for (const Biholomorphism& f :
             {Biholomorphism::identity(1), Biholomorphism::scaling(1, 0.5), Biholomorphism::mobius(0.3)}) {
            const IsometryOperator op =
                pullback_operator(f, p, TruncatedBasis(1, 9), TruncatedBasis(1, 40), disk, rule);
            const Reconstruction rec = reconstruct_map(op, grid);
            double sup = 0.0;
            for (const auto& z : grid) {
                const auto w = rec.map(z);
                sup = std::max(sup, w ? std::abs((*w)(0) - f.map(z)(0)) : std::numeric_limits<double>::infinity());
            }
            const JacobianReport jac = verify_jacobian_relation(op, rec.map, p, grid, column_battery(op, 10));
            b.expect(sup <= 1e-6, f.name + " p=" + num(p) + " roundtrip " + num(sup));
            b.expect(jac.max_residual <= 1e-4 && jac.evaluated == 20 && jac.battery_size == 10,
                     f.name + " p=" + num(p) + " Jacobian residual " + num(jac.max_residual));
            worst_map = std::max(worst_map, sup);
            worst_jac = std::max(worst_jac, jac.max_residual);
        }
    }
    const double dt = seconds_since(t0);
    b.expect(dt <= 20.0, "took " + num(dt) + "s");
    b.note("sup error " + num(worst_map) + ", Jacobian residual " + num(worst_jac));
}

void exhaustion_profiles(Battery& b) {
    std::vector<Point> path;
    for (int k = 1; k <= 5; ++k) path.push_back(pt(1.0 - std::ldexp(1.0, -k)));
    struct Case {
        double p;
        int degree;
        int res;
    };
    for (const Case c : {Case{2.0, 130, 136}, Case{1.0, 260, 140}}) {
        const QuadratureRule rule = build_quadrature(Domain::unit_disk(), c.res);
        const KernelProfile prof =
            kernel_profile(Domain::unit_disk(), c.p, path, TruncatedBasis(1, c.degree), rule);
        double worst = 0.0;
        for (const auto& q : prof.points) {
            worst = std::max(worst, std::abs(q.result.kernel_value / disk_kernel(c.p, q.z(0)) - 1.0));
        }
        b.expect(prof.strictly_increasing, "disk p=" + num(c.p) + " profile not increasing");
        b.expect(worst <= 1e-2, "disk p=" + num(c.p) + " closed-form error " + num(worst));
        b.note("disk p=" + num(c.p) + " worst " + num(worst));
    }
    const Domain ellipse = Domain::ellipse(2.0, 1.0);
    std::vector<Point> epath;
    for (int k = 1; k <= 5; ++k) epath.push_back(pt(2.0 - std::ldexp(1.0, -k)));
    const KernelProfile ep = kernel_profile(ellipse, 2.0, epath, TruncatedBasis(1, 30), build_quadrature(ellipse, 48));
    b.expect(ep.strictly_increasing, "ellipse profile not increasing");
    b.note("ellipse increasing " + std::string(ep.strictly_increasing ? "yes" : "no"));
}

void variation_positivity(Battery& b) {
    const auto t0 = std::chrono::steady_clock::now();
    const TruncatedBasis basis(1, 20);
    const int res = 32;
    const Point z0 = Point::Zero(1);
    const double r = 0.3;
    const QuadratureRule ref = build_quadrature(Domain::unit_disk(), res);
    for (int m : {1, 2}) {
        const DomainFamily fam = DomainFamily::hartogs(hartogs_profile("abs2"), "abs2", m);
        double worst = 0.0;
        for (int i = -1; i <= 1; ++i) {
            for (int j = -1; j <= 1; ++j) {
                const Complex t(0.3 * i, 0.3 * j);
                const double k = fiber_kernel(fam, t, z0, basis, res).kernel_value;
                worst = std::max(worst, std::abs(std::log(k) - (-m * std::log(pi) + 2.0 * m * std::norm(t))));
            }
        }
        b.expect(worst <= 1e-2, "m=" + std::to_string(m) + " Hartogs oracle off by " + num(worst));

        for (const std::string tag : {"abs2", "neg_abs2"}) {
            const DomainFamily f = DomainFamily::hartogs(hartogs_profile(tag), tag, m);
            const TabulatedField field = tabulate_around(
                [&](Complex t) { return std::log(fiber_kernel(f, t, z0, basis, res).kernel_value); }, 0.0, 0.075, 6);
            const ProbeReport rep = psh_probe(field, {0.0}, {r}, default_probe_tolerance(ref));
            const double expected = (tag == "abs2" ? 2.0 : -2.0) * m * r * r;
            const bool have = rep.probes.size() == 1;
            const double margin = have ? rep.probes[0].margin : std::nan("");
            b.expect(have && std::abs(margin - expected) <= 1e-2,
                     tag + " m=" + std::to_string(m) + " margin " + num(margin) + " expected " + num(expected));
            if (tag == "abs2") {
                b.expect(rep.violations == 0, "abs2 m=" + std::to_string(m) + " reports violations");
            } else {
                b.expect(rep.violations == 1, "negative control m=" + std::to_string(m) + " not flagged");
            }
            if (m == 1) b.note(tag + " margin " + num(margin));
        }
    }
    const double dt = seconds_since(t0);
    b.expect(dt <= 60.0, "took " + num(dt) + "s");
}

void dual_norm_consistency(Battery& b) {
    const TruncatedBasis basis(1, 20);
    const std::vector<std::pair<Complex, Complex>> pairs{
        {0.0, 0.0}, {0.3, 0.2}, {Complex(0.0, -0.4), Complex(0.5, 0.1)}, {Complex(-0.2, 0.2), -0.6}, {0.5, Complex(0.0, 0.3)}};
    double worst = 0.0;
    for (int m : {1, 2}) {
        const DomainFamily fam = DomainFamily::hartogs(hartogs_profile("abs2"), "abs2", m);
        for (const auto& [t, z] : pairs) {
            const DualNormResult d = dual_norm(fam, HoloFunctional::delta(pt(z)), t, basis, 32);
            const double k = fiber_kernel(fam, t, pt(z), basis, 32).kernel_value;
            const double e = std::abs(d.value * d.value / k - 1.0);
            worst = std::max(worst, e);
            b.expect(e <= 1e-4, "m=" + std::to_string(m) + " dual^2 vs kernel " + num(e));
        }
        b.expect(dual_norm(fam, HoloFunctional{}, 0.3, basis, 32).value == 0.0, "zero functional is not 0");
    }
    const DomainFamily prod = DomainFamily::product(Domain::unit_disk(), 1);
    const double v = dual_norm(prod, HoloFunctional::delta(pt(0.0)), 0.4, basis, 32).value;
    b.expect(std::abs(v - 1.0 / std::sqrt(pi)) <= 1e-8, "product centre dual norm " + num(v));
    b.note("worst relative gap " + num(worst));
}

void extension_constant(Battery& b) {
    const auto t0 = std::chrono::steady_clock::now();
    const TruncatedBasis zb(1, 1);
    const DomainFamily flat = DomainFamily::product(Domain::unit_disk(), 1);
    for (int k : {0, 1}) {
        const ExtensionResult r = minimal_extension(flat, HoloFunction::monomial(zb, k));
        b.expect(std::abs(r.ratio - 1.0) <= 1e-6, "phi=0 u=z^" + std::to_string(k) + " ratio " + num(r.ratio));
    }
    DomainFamily twisted = DomainFamily::product(Domain::unit_disk(), 1);
    twisted.with_weight(family_weight("re_tz"), "re_tz", true);
    const ExtensionResult r = minimal_extension(twisted, HoloFunction::monomial(zb, 0));
    b.expect(r.ratio <= 1.0 + 1e-3, "phi=Re(tz) ratio " + num(r.ratio));
    const double dt = seconds_since(t0);
    b.expect(dt <= 30.0, "took " + num(dt) + "s");
    b.note("Re(tz) ratio " + num(r.ratio) + " (trivial extension " + num(r.trivial_ratio) + ")");
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void property_suites(Battery& b) {
    // Truncation monotonicity: nested spaces can only raise the kernel.
    const QuadratureRule rule = build_quadrature(Domain::unit_disk(), 48);
    double prev = 0.0;
    for (int d = 5; d <= 30; d += 5) {
        const ExtremalResult r = p_extremal(TruncatedBasis(1, d), rule, Weight::zero(), 1.0, pt(0.5));
        b.expect(r.kernel_value >= prev * (1.0 - r.tol), "kernel decreased at d=" + std::to_string(d));
        prev = r.kernel_value;
    }

    // Homogeneity of the p-norm.
    const TruncatedBasis basis(1, 6);
    Eigen::VectorXcd c(basis.size());
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = Complex(1.0 / (k + 1), 0.5 - 0.1 * k);
    const HoloFunction f(basis, c);
    double worst_h = 0.0;
    for (double p : {0.5, 1.0, 3.0}) {
        const double base = pnorm(f, p, rule, Weight::zero());
        for (Complex lambda : {Complex(2.0), Complex(0.0, 0.5), Complex(-3.0, 4.0)}) {
            const double scaled = pnorm(HoloFunction(basis, lambda * c), p, rule, Weight::zero());
            worst_h = std::max(worst_h, std::abs(scaled / (std::abs(lambda) * base) - 1.0));
        }
    }
    b.expect(worst_h <= 1e-12, "homogeneity off by " + num(worst_h));

    // Quadrature refinement: error of a smooth integral shrinks until it reaches the floor.
    const double exact = 2.0 * pi * std::cyl_bessel_i(1.0, 1.0);
    double last = std::numeric_limits<double>::infinity();
    for (int res : {4, 8, 16, 32}) {
        const double v = integrate(build_quadrature(Domain::unit_disk(), res),
                                   [](const Point& z) { return std::exp(z(0).real()); });
        const double err = std::abs(v - exact);
        b.expect(err <= std::max(last, 1e-13), "refinement error grew at resolution " + std::to_string(res));
        last = err;
    }
    b.expect(last <= 1e-12, "refined integral error " + num(last));

    // CLI determinism: identical specs give byte-identical artifacts.
    const auto root = std::filesystem::temp_directory_path() / ("pberg-determinism-" + std::to_string(::getpid()));
    const std::map<std::string, io::Json> jobs{
        {"kernel", io::Json::parse(R"({"domain":{"kind":"unit_disk"},"solver":{"p":0.8,"degree":12,"resolution":24,"seed":3},"point":[[0.3,0.1]]})")},
        {"family", io::Json::parse(R"({"family":{"fiber":{"kind":"hartogs","u":"abs2"},"m":1},"solver":{"degree":10,"resolution":16},"probe":{"centers":[[0,0]],"radii":[0.3]}})")}};
    bool same = true;
    for (const auto& [command, spec] : jobs) {
        const JobOutcome a = run_job(command, spec, root / "a");
        const JobOutcome c2 = run_job(command, spec, root / "b");
        b.expect(a.code == exit_ok && c2.code == exit_ok, command + " job failed: " + a.message);
        for (const auto& path : a.artifacts) {
            same = same && slurp(path) == slurp(root / "b" / path.filename());
        }
    }
    std::filesystem::remove_all(root);
    b.expect(same, "repeated jobs wrote different bytes");
    b.note("homogeneity " + num(worst_h) + ", refined integral error " + num(last));
}

struct Entry {
    const char* id;
    const char* title;
    void (*run)(Battery&);
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries{
        {"disk_center", "disk p-kernel at the center equals pi^(-2/p)", disk_center},
        {"mobius_covariance", "Mobius covariance and scaling exponent 4/p", mobius_covariance},
        {"p2_closed_forms", "p=2 closed forms on the disk and ball", p2_closed_forms},
        {"decreasing", "kernel decreases under domain inclusion", decreasing},
        {"isometry_roundtrip", "map reconstruction from pullback isometries", isometry_roundtrip},
        {"exhaustion_profiles", "kernel profiles toward the boundary", exhaustion_profiles},
        {"variation_positivity", "Hartogs oracle and plurisubharmonic probe", variation_positivity},
        {"dual_norm", "dual norm of point evaluations", dual_norm_consistency},
        {"extension_constant", "minimal extension stays within the constant pi", extension_constant},
        {"property_suites", "monotonicity, homogeneity, refinement, determinism", property_suites},
    };
    return entries;
}

}  // namespace

const std::vector<std::string>& check_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> out;
        for (const auto& e : registry()) out.emplace_back(e.id);
        return out;
    }();
    return ids;
}

CheckOutcome run_check(const std::string& id) {
    for (const auto& e : registry()) {
        if (id != e.id) continue;
        CheckOutcome out{e.id, e.title, false, "", 0.0};
        const auto t0 = std::chrono::steady_clock::now();
        Battery b;
        try {
            e.run(b);
            out.passed = b.passed();
            out.detail = b.detail();
        } catch (const std::exception& ex) {
            out.detail = std::string("threw: ") + ex.what();
        }
        out.seconds = seconds_since(t0);
        return out;
    }
    return {id, "unknown check", false, "no such check", 0.0};
}

std::vector<CheckOutcome> run_checks(const std::function<void(const CheckOutcome&)>& on_result) {
    std::vector<CheckOutcome> out;
    for (const auto& id : check_ids()) {
        out.push_back(run_check(id));
        if (on_result) on_result(out.back());
    }
    return out;
}

std::string format_outcome(const CheckOutcome& c) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(2);
    s << (c.passed ? "PASS " : "FAIL ") << c.id << " (" << c.seconds << "s): " << c.detail;
    return s.str();
}

}  // namespace pberg::app

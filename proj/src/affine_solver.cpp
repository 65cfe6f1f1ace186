#include "affine_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <unsupported/Eigen/FFT>

namespace pberg::detail {

Eigen::VectorXcd DenseModel::values(const Eigen::VectorXcd& y) const { return b_ + a_ * y; }

Eigen::VectorXcd DenseModel::adjoint(const Eigen::VectorXcd& v) const { return a_.adjoint() * v; }

Eigen::MatrixXcd DenseModel::gram(const Eigen::VectorXd& gamma) const {
    return a_.adjoint() * (gamma.cast<Complex>().asDiagonal() * a_);
}

Eigen::MatrixXcd DenseModel::cosym(const Eigen::VectorXcd& beta) const {
    return a_.adjoint() * (beta.asDiagonal() * a_.conjugate());
}

Reflector Reflector::annihilating(const Eigen::VectorXcd& x) {
    const double norm = x.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw ValidationError("constraint row is numerically zero");
    }
    const double a0 = std::abs(x(0));
    const Complex phase = a0 > 0.0 ? x(0) / a0 : Complex(1.0, 0.0);
    Reflector h;
    h.v = x;
    h.v(0) += phase * norm;
    h.tau = 2.0 / h.v.squaredNorm();
    return h;
}

Eigen::VectorXcd Reflector::apply(const Eigen::VectorXcd& x) const { return x - tau * v * v.dot(x); }

Eigen::MatrixXcd Reflector::sandwich(const Eigen::MatrixXcd& m) const {
    Eigen::MatrixXcd y = m - tau * (m * v) * v.adjoint();
    return y - tau * v * (v.adjoint() * y);
}

Eigen::MatrixXcd Reflector::sandwich_conj(const Eigen::MatrixXcd& m) const {
    Eigen::MatrixXcd y = m - tau * (m * v.conjugate()) * v.transpose();
    return y - tau * v * (v.adjoint() * y);
}

struct PolarModel::Impl {
    std::vector<double> radii;
    int angles = 0;
    int degree = 0;
    Eigen::VectorXd precond;
    Eigen::VectorXcd particular;
    Reflector reflector;
    Eigen::MatrixXd powers;  // powers(j, e) = radii[j]^e, e <= 2 * degree
    mutable Eigen::FFT<double> fft;

    Eigen::Index rings() const { return static_cast<Eigen::Index>(radii.size()); }
    int wrap(long m) const {
        const long r = m % angles;
        return static_cast<int>(r < 0 ? r + angles : r);
    }
};

PolarModel::PolarModel(const PolarLayout& layout, int degree, Eigen::VectorXd precond, Eigen::VectorXcd particular,
                       Reflector reflector)
    : degree_(degree) {
    auto impl = std::make_shared<Impl>();
    impl->radii = layout.radii;
    impl->angles = layout.angles;
    impl->degree = degree;
    impl->precond = std::move(precond);
    impl->particular = std::move(particular);
    impl->reflector = std::move(reflector);
    impl->powers.resize(impl->rings(), 2 * degree + 1);
    for (Eigen::Index j = 0; j < impl->rings(); ++j) {
        impl->powers(j, 0) = 1.0;
        for (int e = 1; e <= 2 * degree; ++e) impl->powers(j, e) = impl->powers(j, e - 1) * impl->radii[j];
    }
    impl_ = std::move(impl);
}

Eigen::Index PolarModel::nodes() const { return impl_->rings() * impl_->angles; }

Eigen::VectorXcd PolarModel::full(const Eigen::VectorXcd& y) const {
    Eigen::VectorXcd padded(degree_ + 1);
    padded(0) = 0.0;
    padded.tail(degree_) = y;
    return impl_->particular + impl_->reflector.apply(padded);
}

Eigen::VectorXcd PolarModel::evaluate_full(const Eigen::VectorXcd& c) const {
    const Impl& m = *impl_;
    Eigen::VectorXcd out(nodes());
    std::vector<Complex> in(m.angles), res;
    for (Eigen::Index j = 0; j < m.rings(); ++j) {
        std::fill(in.begin(), in.end(), Complex(0.0, 0.0));
        for (int k = 0; k <= m.degree; ++k) in[m.wrap(k)] += c(k) * m.precond(k) * m.powers(j, k);
        m.fft.inv(res, in);
        for (int l = 0; l < m.angles; ++l) out(j * m.angles + l) = res[l] * static_cast<double>(m.angles);
    }
    return out;
}

Eigen::VectorXcd PolarModel::values(const Eigen::VectorXcd& y) const { return evaluate_full(full(y)); }

Eigen::VectorXcd PolarModel::adjoint(const Eigen::VectorXcd& v) const {
    const Impl& m = *impl_;
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(m.degree + 1);
    std::vector<Complex> in(m.angles), spec;
    for (Eigen::Index j = 0; j < m.rings(); ++j) {
        for (int l = 0; l < m.angles; ++l) in[l] = v(j * m.angles + l);
        m.fft.fwd(spec, in);
        for (int k = 0; k <= m.degree; ++k) g(k) += m.powers(j, k) * spec[m.wrap(k)];
    }
    g.array() *= m.precond.array().cast<Complex>();
    return m.reflector.apply(g).tail(m.degree);
}

Eigen::MatrixXcd PolarModel::gram(const Eigen::VectorXd& gamma) const {
    const Impl& m = *impl_;
    const int K = m.degree + 1;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(K, K);
    std::vector<Complex> in(m.angles), spec;
    for (Eigen::Index j = 0; j < m.rings(); ++j) {
        for (int l = 0; l < m.angles; ++l) in[l] = gamma(j * m.angles + l);
        m.fft.inv(spec, in);  // spec[q] = (1/M) sum_l gamma_l e^{+2 pi i q l / M}
        for (int l = 0; l < K; ++l) {
            for (int k = 0; k < K; ++k) {
                h(k, l) += m.powers(j, k + l) * spec[m.wrap(l - k)];
            }
        }
    }
    h *= static_cast<double>(m.angles);
    const Eigen::VectorXcd t = m.precond.cast<Complex>();
    h = t.asDiagonal() * h * t.asDiagonal();
    return m.reflector.sandwich(h).bottomRightCorner(m.degree, m.degree);
}

Eigen::MatrixXcd PolarModel::cosym(const Eigen::VectorXcd& beta) const {
    const Impl& m = *impl_;
    const int K = m.degree + 1;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(K, K);
    std::vector<Complex> in(m.angles), spec;
    for (Eigen::Index j = 0; j < m.rings(); ++j) {
        for (int l = 0; l < m.angles; ++l) in[l] = beta(j * m.angles + l);
        m.fft.fwd(spec, in);  // spec[q] = sum_l beta_l e^{-2 pi i q l / M}
        for (int l = 0; l < K; ++l) {
            for (int k = 0; k < K; ++k) {
                h(k, l) += m.powers(j, k + l) * spec[m.wrap(k + l)];
            }
        }
    }
    const Eigen::VectorXcd t = m.precond.cast<Complex>();
    h = t.asDiagonal() * h * t.asDiagonal();
    return m.reflector.sandwich_conj(h).bottomRightCorner(m.degree, m.degree);
}

Eigen::VectorXd PolarModel::monomial_norms2(const PolarLayout& layout, const Eigen::VectorXd& omega, int degree) {
    const auto rings = static_cast<Eigen::Index>(layout.radii.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(degree + 1);
    for (Eigen::Index j = 0; j < rings; ++j) {
        const double ring_weight = omega.segment(j * layout.angles, layout.angles).sum();
        double r2k = 1.0;
        const double r2 = layout.radii[static_cast<std::size_t>(j)] * layout.radii[static_cast<std::size_t>(j)];
        for (int k = 0; k <= degree; ++k, r2k *= r2) out(k) += ring_weight * r2k;
    }
    return out;
}

double weighted_power_sum(const Eigen::VectorXcd& f, const Eigen::VectorXd& omega, double p) {
    CompensatedSum sum;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        sum.add(static_cast<long double>(omega(i)) * std::pow(std::abs(f(i)), p));
    }
    return sum.value();
}

namespace {

struct Smoothed {
    double p;
    double eps;

    double objective(const Eigen::VectorXcd& f, const Eigen::VectorXd& omega) const {
        CompensatedSum sum;
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            sum.add(static_cast<long double>(omega(i)) * std::pow(std::norm(f(i)) + eps, 0.5 * p));
        }
        return sum.value();
    }
};

struct LevelState {
    Eigen::VectorXcd y;
    double objective = 0.0;
    double stationarity = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

Eigen::VectorXcd least_squares_start(const AffineModel& model, const Eigen::VectorXd& omega) {
    const Eigen::VectorXcd b = model.values(Eigen::VectorXcd::Zero(model.unknowns()));
    const Eigen::MatrixXcd g = model.gram(omega);
    const Eigen::VectorXcd rhs = -model.adjoint(omega.cast<Complex>().cwiseProduct(b));
    return g.ldlt().solve(rhs);
}

// Newton iterations with Armijo backtracking on one smoothing level; IRLS (majorize-
// minimize) steps replace Newton where the Hessian is indefinite (p < 1).
void run_level(const AffineModel& model, const Eigen::VectorXd& omega, const Smoothed& sm, double target,
               int budget, LevelState& st) {
    const Eigen::Index K = model.unknowns();
    const double half_p = 0.5 * sm.p;
    Eigen::VectorXcd f = model.values(st.y);
    st.objective = sm.objective(f, omega);
    for (int it = 0; it < budget; ++it) {
        const Eigen::Index n = f.size();
        Eigen::VectorXd hp(n), gamma(n);
        Eigen::VectorXcd beta(n), weighted(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = std::norm(f(i));
            const double q = s + sm.eps;
            const double d1 = half_p * std::pow(q, half_p - 1.0);
            const double d2 = half_p * (half_p - 1.0) * std::pow(q, half_p - 2.0);
            hp(i) = omega(i) * d1;
            gamma(i) = omega(i) * (d1 + d2 * s);
            beta(i) = omega(i) * d2 * f(i) * f(i);
            weighted(i) = hp(i) * f(i);
        }
        const Eigen::VectorXcd g = model.adjoint(weighted);
        st.stationarity = g.norm() / std::max(st.objective, std::numeric_limits<double>::min());
        if (st.stationarity <= target) return;

        const Eigen::MatrixXcd h1 = model.gram(gamma);
        const Eigen::MatrixXcd h2 = model.cosym(beta);
        Eigen::MatrixXd m(2 * K, 2 * K);
        m.topLeftCorner(K, K) = (h1 + h2).real();
        m.topRightCorner(K, K) = (h2 - h1).imag();
        m.bottomLeftCorner(K, K) = (h1 + h2).imag();
        m.bottomRightCorner(K, K) = (h1 - h2).real();
        m = 0.5 * (m + m.transpose()).eval();
        Eigen::VectorXd rhs(2 * K);
        rhs.head(K) = -g.real();
        rhs.tail(K) = -g.imag();

        Eigen::VectorXcd step;
        double slope = 0.0;
        const Eigen::LLT<Eigen::MatrixXd> llt(m);
        if (llt.info() == Eigen::Success) {
            const Eigen::VectorXd d = llt.solve(rhs);
            step = d.head(K).cast<Complex>() + Complex(0.0, 1.0) * d.tail(K).cast<Complex>();
            slope = -2.0 * rhs.dot(d);
        }
        bool accepted = false;
        if (step.size() == K && slope < 0.0) {
            for (double t = 1.0; t > 1e-14; t *= 0.5) {
                const Eigen::VectorXcd y_try = st.y + t * step;
                const Eigen::VectorXcd f_try = model.values(y_try);
                const double j_try = sm.objective(f_try, omega);
                if (j_try <= st.objective + 1e-4 * t * slope) {
                    st.y = y_try;
                    f = f_try;
                    st.objective = j_try;
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted && sm.p <= 2.0) {
            // Majorizer of the concave (s + eps)^{p/2}: weighted least squares with weights h'.
            const Eigen::VectorXcd b = model.values(Eigen::VectorXcd::Zero(K));
            const Eigen::VectorXcd y_try =
                model.gram(hp).ldlt().solve(-model.adjoint(hp.cast<Complex>().cwiseProduct(b)));
            const Eigen::VectorXcd f_try = model.values(y_try);
            const double j_try = sm.objective(f_try, omega);
            if (j_try < st.objective) {
                st.y = y_try;
                f = f_try;
                st.objective = j_try;
                accepted = true;
            }
        }
        ++st.iterations;
        if (!accepted) return;  // no descent left at working precision
    }
}

LevelState run_ladder(const AffineModel& model, const Eigen::VectorXd& omega, double p, const SolverOptions& opts,
                      double tol, Eigen::VectorXcd start) {
    LevelState st;
    st.y = std::move(start);
    if (p == 2.0) {
        run_level(model, omega, Smoothed{p, 0.0}, 0.01 * tol, opts.max_iterations, st);
        return st;
    }
    const auto& ladder = opts.smoothing;
    for (std::size_t level = 0; level < ladder.size(); ++level) {
        const bool last = level + 1 == ladder.size();
        const double target = last ? 0.01 * tol : std::max(1e-6, tol);
        const int budget = std::max(1, opts.max_iterations - st.iterations);
        run_level(model, omega, Smoothed{p, ladder[level]}, target, budget, st);
    }
    return st;
}

}  // namespace

AffineSolution minimize_pnorm(const AffineModel& model, const Eigen::VectorXd& omega, double p,
                              const SolverOptions& opts, double tol) {
    if (!(p > 0.0)) throw ValidationError("p must be positive");
    if (opts.smoothing.empty()) throw ValidationError("smoothing ladder must not be empty");
    const Eigen::Index K = model.unknowns();
    AffineSolution out;
    if (K == 0) {
        out.y = Eigen::VectorXcd(0);
        out.objective = weighted_power_sum(model.values(out.y), omega, p);
        out.converged = true;
        return out;
    }
    const Eigen::VectorXcd y2 = least_squares_start(model, omega);

    const int starts = p < 1.0 ? std::max(1, opts.starts) : 1;
    std::vector<LevelState> runs;
    runs.reserve(static_cast<std::size_t>(starts));
    const double l2 = std::sqrt(std::max(weighted_power_sum(model.values(y2), omega, 2.0), 0.0));
    const double sigma = 0.5 * l2 / std::sqrt(static_cast<double>(K));
    for (int s = 0; s < starts; ++s) {
        Eigen::VectorXcd y0 = y2;
        if (s > 0) {
            std::mt19937_64 rng(opts.seed + static_cast<std::uint64_t>(s));
            std::normal_distribution<double> normal(0.0, sigma / std::sqrt(2.0));
            for (Eigen::Index k = 0; k < K; ++k) y0(k) += Complex(normal(rng), normal(rng));
        }
        runs.push_back(run_ladder(model, omega, p, opts, tol, std::move(y0)));
    }

    std::vector<double> objectives;
    for (auto& r : runs) objectives.push_back(weighted_power_sum(model.values(r.y), omega, p));
    const auto best = static_cast<std::size_t>(std::min_element(objectives.begin(), objectives.end()) - objectives.begin());
    // Spread is measured on kernel values J^{-2/p}.
    double kmin = std::numeric_limits<double>::infinity(), kmax = 0.0;
    for (double j : objectives) {
        const double k = std::pow(j, -2.0 / p);
        kmin = std::min(kmin, k);
        kmax = std::max(kmax, k);
    }
    out.y = runs[best].y;
    out.objective = objectives[best];
    out.stationarity = runs[best].stationarity;
    for (auto& r : runs) out.iterations += r.iterations;
    out.spread = kmax > 0.0 ? (kmax - kmin) / kmax : 0.0;
    out.converged = out.stationarity <= tol && out.spread <= tol;
    return out;
}

}  // namespace pberg::detail

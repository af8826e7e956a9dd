#include "multiauto/memory_material.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <memory>

#include "multiauto/parallel.hpp"

namespace multiauto {

namespace {

double spectral_norm(const Eigen::MatrixXd& m) {
    if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

} // namespace

void MemorySystem::validate() const {
    if (dim < 1) throw DimensionMismatch("system dimension must be >= 1");
    if (A.rows() != dim || A.cols() != dim) throw DimensionMismatch("A must be dim x dim");
    if (has_memory && (profile.arity_time() != 1 || profile.out_dim() != 1 || profile.arity_state() != 0))
        throw DimensionMismatch("memory profile must be scalar in t");
    if (has_forcing && (f.arity_time() != 1 || f.arity_state() != dim || f.out_dim() != dim))
        throw DimensionMismatch("forcing must map (t, u in R^d) to R^d");
    if (u0.size() != dim) throw DimensionMismatch("u0 must be in R^d");
}

Eigen::MatrixXd MemorySystem::B(double t) const {
    if (!has_memory) return Eigen::MatrixXd::Zero(dim, dim);
    return profile.eval1(t) * A;
}

MemorySystem MemorySystem::laplacian1d(int d, double h) {
    if (d < 1 || !(h > 0)) throw DimensionMismatch("laplacian1d needs d >= 1, h > 0");
    MemorySystem sys;
    sys.dim = d;
    sys.A = Eigen::MatrixXd::Zero(d, d);
    double c = 1.0 / (h * h);
    for (int i = 0; i < d; ++i) {
        sys.A(i, i) = -2.0 * c;
        if (i > 0) sys.A(i, i - 1) = c;
        if (i + 1 < d) sys.A(i, i + 1) = c;
    }
    sys.u0 = Eigen::VectorXd::Zero(d);
    return sys;
}

bool MemorySystem::profile_within(double gamma, double bound, double t_max) const {
    if (!has_memory) return true;
    const double h = 1e-5;
    for (double t = 0.0; t <= t_max; t += t_max / 50.0) {
        double v = profile.eval1(t);
        double dv = (profile.eval1(t + h) - profile.eval1(std::max(0.0, t - h))) / (t >= h ? 2 * h : h);
        double env = bound * std::exp(-gamma * t);
        if (std::abs(v) > env + 1e-12 || std::abs(dv) > env + 1e-12) return false;
    }
    return true;
}

Eigen::MatrixXd ResolventTable::at(double t) const {
    if (times.empty()) throw EmptyList("resolvent table is empty");
    if (t < times.front() - 1e-12 || t > times.back() + 1e-12)
        throw HorizonExceedsTable("t=" + std::to_string(t) + " outside the tabulated range");
    double pos = (t - times.front()) / step;
    auto k = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
    if (k >= times.size() - 1) return R_values.back();
    double w = pos - static_cast<double>(k);
    return (1.0 - w) * R_values[k] + w * R_values[k + 1];
}

namespace {

// Heun step with trapezoidal memory: second order throughout.
std::vector<Eigen::MatrixXd> integrate_resolvent(const MemorySystem& sys, double t_max, double dt) {
    const int d = sys.dim;
    const auto m = static_cast<std::size_t>(std::llround(t_max / dt));
    std::vector<Eigen::MatrixXd> R;
    R.reserve(m + 1);
    R.push_back(Eigen::MatrixXd::Identity(d, d));

    std::vector<double> prof(m + 2, 0.0);
    if (sys.has_memory)
        for (std::size_t j = 0; j < prof.size(); ++j) prof[j] = sys.profile.eval1(static_cast<double>(j) * dt);

    // memory term reads A R(s); cache those products as they appear
    std::vector<Eigen::MatrixXd> AR;
    AR.reserve(m + 1);
    AR.push_back(sys.A);

    auto memory_sum = [&](std::size_t k, const Eigen::MatrixXd* head) {
        // trapezoid of B(t_k - s) R(s) over [0, t_k]; head overrides R at s = t_k
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
        if (!sys.has_memory || k == 0) return acc;
        acc = 0.5 * prof[k] * AR[0];
        for (std::size_t j = 1; j < k; ++j) acc += prof[k - j] * AR[j];
        acc += 0.5 * prof[0] * (head ? (sys.A * *head) : AR[k]);
        return Eigen::MatrixXd(dt * acc);
    };

    for (std::size_t k = 0; k < m; ++k) {
        Eigen::MatrixXd phi_k = sys.A * R[k] + memory_sum(k, nullptr);
        Eigen::MatrixXd pred = R[k] + dt * phi_k;
        Eigen::MatrixXd phi_next = sys.A * pred + memory_sum(k + 1, &pred);
        R.push_back(R[k] + 0.5 * dt * (phi_k + phi_next));
        AR.push_back(sys.A * R.back());
    }
    return R;
}

struct EnvelopeFit {
    double M = 0.0, delta = 0.0;
};

EnvelopeFit fit_envelope(const std::vector<double>& times, const std::vector<double>& norms) {
    // The norm of an oscillatory resolvent may dip through zero; regressing on
    // raw values then misreads the decay rate badly. Fit the slope on the
    // running-maximum hull from the right (which hugs the true envelope) over
    // the tail half, then take the smallest M that covers every grid point.
    std::vector<double> env(norms.size());
    double run = 0.0;
    for (std::size_t i = norms.size(); i-- > 0;) {
        run = std::max(run, norms[i]);
        env[i] = run;
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = times.size() / 2; i < times.size(); ++i) {
        if (!(env[i] > 1e-300)) continue;
        double x = times[i], y = std::log(env[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    EnvelopeFit fit;
    if (n < 2) return fit;
    double den = n * sxx - sx * sx;
    if (den == 0) return fit;
    double slope = (n * sxy - sx * sy) / den;
    fit.delta = -slope;
    // a decay below rounding scale over the whole table is no decay at all
    if (!(fit.delta * (times.back() - times.front()) > 1e-9)) fit.delta = 0.0;
    if (fit.delta > 0) {
        for (std::size_t i = 0; i < norms.size(); ++i)
            fit.M = std::max(fit.M, norms[i] * std::exp(fit.delta * times[i]));
        fit.M *= 1.0 + 1e-9;
    } else {
        fit.M = std::exp((sy - slope * sx) / n);
    }
    return fit;
}

} // namespace

ResolventTable build_resolvent(const MemorySystem& sys, double t_max, double dt, bool require_decay) {
    sys.validate();
    if (!(t_max > 0) || !(dt > 0)) throw ConfigError("build_resolvent needs t_max > 0, dt > 0");
    double supB = 0.0;
    if (sys.has_memory) {
        for (double t = 0; t <= t_max; t += t_max / 64.0)
            supB = std::max(supB, spectral_norm(sys.B(t)));
    }
    if (dt * (spectral_norm(sys.A) + t_max * supB) >= 0.5)
        throw StepUnstable("time step too coarse for ||A|| and the memory mass");

    auto coarse = integrate_resolvent(sys, t_max, dt);
    auto fine = integrate_resolvent(sys, t_max, dt / 2);
    double herr = 0.0;
    for (std::size_t k = 0; k < coarse.size(); ++k)
        herr = std::max(herr, (coarse[k] - fine[2 * k]).cwiseAbs().maxCoeff());
    if (herr > 1e-3) throw StepUnstable("step halving changed the table by " + std::to_string(herr));

    ResolventTable table;
    table.step = dt;
    table.R_values = std::move(coarse);
    table.halving_err = herr;
    table.times.resize(table.R_values.size());
    table.norms.resize(table.R_values.size());
    for (std::size_t k = 0; k < table.times.size(); ++k) table.times[k] = static_cast<double>(k) * dt;
    parallel_for(table.norms.size(), [&](std::size_t k) { table.norms[k] = spectral_norm(table.R_values[k]); });

    EnvelopeFit fit = fit_envelope(table.times, table.norms);
    table.M_est = fit.M;
    table.delta_est = fit.delta;
    if (require_decay && !(table.delta_est > 0))
        throw NoDecay("envelope fit gives delta_est=" + std::to_string(table.delta_est));
    return table;
}

PropertyRReport verify_property_R(const ResolventTable& table) {
    PropertyRReport rep;
    rep.M_est = table.M_est;
    rep.delta_est = table.delta_est;
    if (!(table.delta_est > 0) || !(table.M_est > 0)) return rep;
    double worst = 0.0;
    for (std::size_t k = 0; k < table.times.size(); ++k) {
        double env = table.M_est * std::exp(-table.delta_est * table.times[k]);
        if (env > 1e-300) worst = std::max(worst, table.norms[k] / env);
    }
    rep.worst_excess = worst;
    rep.passed = worst <= 1.05;
    return rep;
}

MildSolveResult solve_mild_nonlocal(const MemorySystem& sys, const ResolventTable& table, double horizon,
                                    double tol, double rho) {
    sys.validate();
    if (table.times.empty() || horizon > table.times.back() + 1e-12)
        throw HorizonExceedsTable("resolvent table does not cover the horizon");
    if (!(table.delta_est > 0)) throw CertificateInvalid("resolvent decay rate is not positive");
    ContractionCertificate cert;
    cert.lip_outer = table.M_est * sys.lip_g;
    cert.lip_inner = sys.lip_f;
    cert.kernel_mass = table.M_est / table.delta_est;
    cert.theta = cert.lip_outer + cert.lip_inner * cert.kernel_mass;
    cert.valid = cert.theta < 1.0;
    cert.require();

    const double dt = table.step;
    const auto m = static_cast<std::size_t>(std::llround(horizon / dt));
    const int d = sys.dim;

    MildSolveResult res;
    res.trace.certificate = cert;
    res.times.resize(m + 1);
    for (std::size_t k = 0; k <= m; ++k) res.times[k] = static_cast<double>(k) * dt;

    std::vector<Eigen::VectorXd> u(m + 1, Eigen::VectorXd::Zero(d)), unew(m + 1, Eigen::VectorXd::Zero(d));
    std::vector<Eigen::VectorXd> fv(m + 1, Eigen::VectorXd::Zero(d));

    auto sweep_into = [&](const std::vector<Eigen::VectorXd>& uin, std::vector<Eigen::VectorXd>& uout) {
        Eigen::VectorXd head = sys.u0;
        if (sys.g_nonlocal) head += sys.g_nonlocal(uin);
        if (sys.has_forcing) {
            parallel_for(m + 1, [&](std::size_t j) {
                std::vector<double> out(d);
                sys.f.eval_into(&res.times[j], uin[j].data(), out.data());
                for (int c = 0; c < d; ++c) fv[j](c) = out[c];
            });
        }
        parallel_for(m + 1, [&](std::size_t i) {
            Eigen::VectorXd acc = table.R_values[i] * head;
            if (sys.has_forcing && i > 0) {
                Eigen::VectorXd quad = 0.5 * (table.R_values[i] * fv[0] + table.R_values[0] * fv[i]);
                for (std::size_t j = 1; j < i; ++j) quad += table.R_values[i - j] * fv[j];
                acc += dt * quad;
            }
            uout[i] = acc;
        });
    };

    double target = tol * (1.0 - cert.theta);
    bool have_y0 = false;
    for (int sweep = 0; sweep < 500; ++sweep) {
        sweep_into(u, unew);
        double diff = 0.0;
        for (std::size_t i = 0; i <= m; ++i)
            diff = std::max(diff, (unew[i] - u[i]).cwiseAbs().maxCoeff());
        res.trace.sup_diffs.push_back(diff);
        u.swap(unew);
        if (!have_y0) {
            res.y0 = u; // first Picard iterate from the zero trajectory
            have_y0 = true;
        }
        if (diff <= target) break;
        if (sweep == 499) throw TruncationUnstable("mild-solution iteration failed to converge");
    }
    res.trace.k_final = static_cast<int>(res.trace.sup_diffs.size());
    res.u = u;

    sweep_into(u, unew);
    double r = 0.0;
    for (std::size_t i = 0; i <= m; ++i) r = std::max(r, (unew[i] - u[i]).cwiseAbs().maxCoeff());
    res.trace.residual = r;
    res.trace.quad_err = table.halving_err + dt * dt;

    res.ball_gap = 0.0;
    for (std::size_t i = 0; i <= m; ++i)
        res.ball_gap = std::max(res.ball_gap, (res.u[i] - res.y0[i]).cwiseAbs().maxCoeff());
    res.ball_ok = res.ball_gap <= rho;

    auto traj = std::make_shared<std::vector<Eigen::VectorXd>>(res.u);
    double t0 = res.times.front(), tn = res.times.back();
    res.trace.solution.arity_time = 1;
    res.trace.solution.out_dim = d;
    res.trace.solution.fn = [traj, t0, tn, dt, d](const double* t, const double*, double* out) {
        double tc = std::clamp(*t, t0, tn);
        double pos = (tc - t0) / dt;
        auto k = static_cast<std::size_t>(std::floor(pos));
        if (k >= traj->size() - 1) k = traj->size() - 2;
        double w = pos - static_cast<double>(k);
        for (int c = 0; c < d; ++c) out[c] = (1.0 - w) * (*traj)[k](c) + w * (*traj)[k + 1](c);
    };

    // reporting grids: sup norm of the trajectory over time
    GridWindow tw({t0}, {tn}, static_cast<int>(std::min<std::size_t>(m + 1, 101)));
    auto norm_grid = [&](const std::vector<Eigen::VectorXd>& traj_in) {
        SampledGrid g;
        g.window = tw;
        g.values.resize(tw.point_count());
        g.err_bound = res.trace.quad_err;
        for (std::size_t i = 0; i < g.values.size(); ++i) {
            double t = tw.point(i)[0];
            auto k = static_cast<std::size_t>(std::llround((t - t0) / dt));
            k = std::min(k, traj_in.size() - 1);
            g.values[i] = traj_in[k].cwiseAbs().maxCoeff();
        }
        return g;
    };
    res.trace.final = norm_grid(res.u);
    res.trace.prev = norm_grid(res.y0);
    res.trace.notes.push_back("trajectory sampled at " + std::to_string(m + 1) + " times, dt=" +
                              std::to_string(dt));
    return res;
}

} // namespace multiauto

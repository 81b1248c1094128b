#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "a2bcd/errors.hpp"
#include "a2bcd/rng.hpp"

namespace a2bcd {

/// Objective for the continuous-time analysis. Callers rescale so the
/// strong-convexity modulus is 1 and f(0) = 0 = min f.
struct OdeProblem {
    std::size_t dim = 0;
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> grad;
};

enum class OdeDelayMode { constant, piecewise_random };

struct OdeConfig {
    double eta = 1;        ///< n * sqrt(kappa); the damping time scale
    double step = 1e-3;    ///< fixed integration step; <= tau/10 when delayed
    double horizon = 1;
    double tau = 0;        ///< continuous-time delay bound (0: synchronous)
    OdeDelayMode mode = OdeDelayMode::constant;
    std::uint64_t seed = 0;
    bool instability_check = true;  ///< sync integration: reject energy growth
};

/// Dense fixed-step trajectory: positions, velocities, and accelerations at
/// every step, plus cubic Hermite evaluation anywhere in [0, t_last] (times
/// before 0 clamp to the constant pre-history Y0, V = 0).
class OdeTrajectory {
public:
    double eta = 0, step = 0, tau = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> y, v, acc;

    std::size_t size() const { return times.size(); }
    double t_last() const { return times.empty() ? 0.0 : times.back(); }

    void y_at(double s, std::span<double> out) const { interpolate(s, y, v, out); }

    /// Velocity by Hermite interpolation of v with the stored accelerations.
    void v_at(double s, std::span<double> out) const {
        if (s < 0) {
            for (auto& o : out) o = 0.0;  // constant pre-history
            return;
        }
        interpolate(s, v, acc, out);
    }

private:
    void interpolate(double s, const std::vector<std::vector<double>>& val,
                     const std::vector<std::vector<double>>& der, std::span<double> out) const {
        const std::size_t n = times.size();
        if (s <= 0) {
            for (std::size_t j = 0; j < out.size(); ++j) out[j] = val.front()[j];
            return;
        }
        if (n == 1) {  // single-sample start: linear fallback
            for (std::size_t j = 0; j < out.size(); ++j) out[j] = val[0][j] + s * der[0][j];
            return;
        }
        // uniform grid; clamp to the last interval and extrapolate past the end
        std::size_t i = static_cast<std::size_t>(s / step);
        if (i >= n - 1) i = n - 2;
        const double h = times[i + 1] - times[i];
        const double th = (s - times[i]) / h;
        const double t2 = th * th, t3 = t2 * th;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + th;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        for (std::size_t j = 0; j < out.size(); ++j)
            out[j] = h00 * val[i][j] + h * h10 * der[i][j] + h01 * val[i + 1][j] +
                     h * h11 * der[i + 1][j];
    }
};

/// E(t) = e^{t/eta} (f(Y) + 1/4 |Y + eta Ydot|^2), the decaying energy of the
/// synchronous dynamics.
inline double ode_energy(const OdeProblem& f, double eta, double t, std::span<const double> y,
                         std::span<const double> v) {
    double nrm = 0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        const double z = y[j] + eta * v[j];
        nrm += z * z;
    }
    return std::exp(t / eta) * (f.value(y) + 0.25 * nrm);
}

namespace detail {

struct DelayFn {
    double tau = 0;
    OdeDelayMode mode = OdeDelayMode::constant;
    std::uint64_t seed = 0;

    double operator()(double t) const {
        if (mode == OdeDelayMode::constant || tau == 0) return tau;
        const auto piece = static_cast<std::uint64_t>(std::max(t, 0.0) / tau);
        const double u = static_cast<double>(mix64(seed ^ mix64(piece)) >> 11) * 0x1.0p-53;
        return u * tau;
    }
};

template <typename GradAt>
void rk4_integrate(const OdeProblem& f, const OdeConfig& cfg, std::span<const double> y0,
                   std::span<const double> v0, GradAt&& grad_at, OdeTrajectory& out) {
    const std::size_t d = f.dim;
    const double h = cfg.step;
    if (!(h > 0) || !(cfg.horizon > 0)) throw std::invalid_argument("step and horizon must be positive");
    if (!(cfg.eta > 0)) throw std::invalid_argument("eta must be positive");
    const double c1 = 2.0 / cfg.eta, c2 = 2.0 / (cfg.eta * cfg.eta);

    std::vector<double> yy(y0.begin(), y0.end()), vv(v0.begin(), v0.end());
    std::vector<double> g(d), a0(d);
    std::vector<double> ky1(d), kv1(d), ky2(d), kv2(d), ky3(d), kv3(d), ky4(d), kv4(d);
    std::vector<double> ty(d), tv(d);

    auto accel = [&](double t, std::span<const double> yq, std::span<const double> vq,
                     std::span<double> aq) {
        grad_at(t, yq, g);
        for (std::size_t j = 0; j < d; ++j) aq[j] = -c1 * vq[j] - c2 * g[j];
    };

    out.eta = cfg.eta;
    out.step = h;
    out.tau = cfg.tau;
    // the sample enters the history before the first acceleration evaluation:
    // delayed right-hand sides interpolate the trajectory built so far
    out.times.push_back(0.0);
    out.y.push_back(yy);
    out.v.push_back(vv);
    accel(0.0, yy, vv, a0);
    out.acc.push_back(a0);

    double energy_prev = cfg.instability_check ? ode_energy(f, cfg.eta, 0.0, yy, vv) : 0.0;
    const auto steps = static_cast<std::size_t>(std::ceil(cfg.horizon / h - 1e-12));
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * h;
        accel(t, yy, vv, kv1);
        ky1 = vv;

        for (std::size_t j = 0; j < d; ++j) {
            ty[j] = yy[j] + 0.5 * h * ky1[j];
            tv[j] = vv[j] + 0.5 * h * kv1[j];
        }
        accel(t + 0.5 * h, ty, tv, kv2);
        ky2 = tv;

        for (std::size_t j = 0; j < d; ++j) {
            ty[j] = yy[j] + 0.5 * h * ky2[j];
            tv[j] = vv[j] + 0.5 * h * kv2[j];
        }
        accel(t + 0.5 * h, ty, tv, kv3);
        ky3 = tv;

        for (std::size_t j = 0; j < d; ++j) {
            ty[j] = yy[j] + h * ky3[j];
            tv[j] = vv[j] + h * kv3[j];
        }
        accel(t + h, ty, tv, kv4);
        ky4 = tv;

        for (std::size_t j = 0; j < d; ++j) {
            yy[j] += h / 6.0 * (ky1[j] + 2 * ky2[j] + 2 * ky3[j] + ky4[j]);
            vv[j] += h / 6.0 * (kv1[j] + 2 * kv2[j] + 2 * kv3[j] + kv4[j]);
        }
        const double tn = static_cast<double>(i + 1) * h;
        accel(tn, yy, vv, a0);
        out.times.push_back(tn);
        out.y.push_back(yy);
        out.v.push_back(vv);
        out.acc.push_back(a0);

        if (cfg.instability_check) {
            const double e = ode_energy(f, cfg.eta, tn, yy, vv);
            if (e > energy_prev + 1e-6 * (1.0 + std::abs(energy_prev)))
                throw NumericError("energy increased: integration step too large");
            energy_prev = e;
        }
    }
}

}  // namespace detail

/// Integrates Ydotdot + (2/eta) Ydot + (2/eta^2) grad f(Y) = 0 with classical
/// fourth-order Runge-Kutta at fixed step.
inline OdeTrajectory integrate_sync(const OdeProblem& f, std::span<const double> y0,
                                    std::span<const double> v0, const OdeConfig& cfg) {
    OdeTrajectory traj;
    detail::rk4_integrate(
        f, cfg, y0, v0,
        [&](double, std::span<const double> yq, std::span<double> g) { f.grad(yq, g); }, traj);
    return traj;
}

/// Delayed dynamics: the gradient is taken at Yhat(t) = Y(t - j(t)), j(t) in
/// [0, tau], where past values come from cubic interpolation of the stored
/// history (constant Y0 before t = 0). tau = 0 falls back to integrate_sync.
inline OdeTrajectory integrate_delayed(const OdeProblem& f, std::span<const double> y0,
                                       std::span<const double> v0, const OdeConfig& cfg) {
    if (cfg.tau == 0) return integrate_sync(f, y0, v0, cfg);
    if (!(cfg.step <= cfg.tau / 10.0))
        throw std::invalid_argument("need step <= tau/10 to resolve the delayed history");
    OdeTrajectory traj;
    const detail::DelayFn delay{cfg.tau, cfg.mode, cfg.seed};
    std::vector<double> yhat(f.dim);
    OdeConfig c = cfg;
    c.instability_check = false;  // only the composite energy is monotone here
    detail::rk4_integrate(
        f, c, y0, v0,
        [&](double t, std::span<const double>, std::span<double> g) {
            traj.y_at(t - delay(t), yhat);
            f.grad(yhat, g);
        },
        traj);
    return traj;
}

/// Weight shaping the continuous asynchronicity error:
/// c(t) = c0 (e^{-rt} + e^{-r tau}/(1 - e^{-r tau}) (e^{-rt} - 1));
/// c(0) = c0 and c(tau) = 0.
inline double delay_kernel(double t, double c0, double r, double tau) {
    const double ert = std::exp(-r * t);
    const double ertau = std::exp(-r * tau);
    return c0 * (ert + ertau / (1.0 - ertau) * (ert - 1.0));
}

struct AsyncErrorTerms {
    double A = 0;  ///< integral of c(t-s) |Ydot(s)|^2 over [t-tau, t]
    double D = 0;  ///< integral of |Ydot(s)|^2 over the same window
};

/// Both error integrals at time t, by composite Simpson quadrature over the
/// stored history (velocities interpolated, exact zero before t = 0).
inline AsyncErrorTerms async_error_terms(const OdeTrajectory& traj, double t, double c0, double r,
                                         double tau) {
    if (!(tau > 0)) throw std::invalid_argument("tau must be positive");
    if (r * tau > 0.5) throw std::invalid_argument("analysis requires r*tau <= 1/2");
    if (t > traj.t_last() + 1e-12) throw std::invalid_argument("trajectory does not reach t");
    const double lo = std::max(t - tau, 0.0);
    if (t <= lo) return {};
    std::size_t half = static_cast<std::size_t>(std::ceil((t - lo) / traj.step)) + 1;
    const std::size_t nq = 2 * half;  // even interval count for Simpson
    const double hq = (t - lo) / static_cast<double>(nq);
    std::vector<double> vbuf(traj.v.front().size());
    AsyncErrorTerms out;
    for (std::size_t i = 0; i <= nq; ++i) {
        const double s = lo + hq * static_cast<double>(i);
        traj.v_at(s, vbuf);
        double v2 = 0;
        for (const double x : vbuf) v2 += x * x;
        const double w = (i == 0 || i == nq) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        out.A += w * delay_kernel(t - s, c0, r, tau) * v2;
        out.D += w * v2;
    }
    out.A *= hq / 3.0;
    out.D *= hq / 3.0;
    return out;
}

/// Trajectory CSV: t,f_gap,E,A,composite (A and composite use the supplied
/// kernel constants when tau > 0; with tau = 0 the composite equals E).
inline void ode_trajectory_csv(const OdeTrajectory& traj, const OdeProblem& f, double c0, double r,
                               std::ostream& out) {
    out << "t,f_gap,E,A,composite\n";
    char buf[160];
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.times[i];
        const double fg = f.value(traj.y[i]);
        const double e = ode_energy(f, traj.eta, t, traj.y[i], traj.v[i]);
        double a = 0;
        if (traj.tau > 0) a = async_error_terms(traj, t, c0, r, traj.tau).A;
        const double composite = e + std::exp(t / traj.eta) * a;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", t, fg, e, a, composite);
        out << buf;
    }
}

}  // namespace a2bcd

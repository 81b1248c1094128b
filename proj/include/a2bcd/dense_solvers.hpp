#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "a2bcd/delay.hpp"
#include "a2bcd/diagnostics.hpp"
#include "a2bcd/history.hpp"
#include "a2bcd/oracle.hpp"
#include "a2bcd/rng.hpp"
#include "a2bcd/sampler.hpp"
#include "a2bcd/schedule.hpp"
#include "a2bcd/trace.hpp"

namespace a2bcd {

/// The three-sequence state of the accelerated iteration. After every step
/// y == alpha*v + (1-alpha)*x, and the history ring retains the last tau+1
/// y-vectors so the delayed iterate and the asynchronicity error are exactly
/// computable.
struct DenseState {
    std::vector<double> y, v, x;
    std::uint64_t k = 0;
    YHistory history;

    DenseState(const std::vector<double>& x0, std::size_t tau)
        : y(x0), v(x0), x(x0), history(tau, x0) {}
};

/// Builds the delayed iterate of the simulator: block j of the result is
/// block j of y_{k - staleness(k, j)}.
inline void assemble_delayed(const BlockPartition& part, const YHistory& hist,
                             const DelaySchedule& delays, std::uint64_t k,
                             std::vector<double>& out) {
    for (std::size_t j = 0; j < part.n_blocks(); ++j) {
        const auto stale = delays.staleness(k, j);
        const std::vector<double>& src = hist.at(static_cast<std::int64_t>(k - stale));
        for (std::size_t t = part.begin(j); t < part.end(j); ++t) out[t] = src[t];
    }
}

/// One accelerated step with the gradient taken at `delayed_y`:
///   x_{k+1} = y_k - h / L_i * grad_i f(y_hat)        (block i only)
///   v_{k+1} = beta v_k + (1-beta) y_k - grad_i f(y_hat) / sqrt(sigma L_i)
///   y_{k+1} = alpha v_{k+1} + (1-alpha) x_{k+1}
/// `grad` is caller-provided scratch of the block size.
inline void a2bcd_step(const ProblemOracle& oracle, const Schedule& sched, DenseState& st,
                       std::size_t block, std::span<const double> delayed_y,
                       std::span<double> grad) {
    const auto& part = oracle.partition();
    const auto& prm = oracle.params();
    oracle.block_gradient(block, delayed_y, grad);

    const double Li = prm.L_blocks[block];
    const double x_coef = sched.h / Li;
    const double v_coef = 1.0 / std::sqrt(prm.sigma * Li);

    st.x = st.y;
    for (std::size_t t = 0; t < st.v.size(); ++t)
        st.v[t] = sched.beta * st.v[t] + (1.0 - sched.beta) * st.y[t];
    const std::size_t b0 = part.begin(block);
    for (std::size_t t = b0; t < part.end(block); ++t) {
        st.x[t] -= x_coef * grad[t - b0];
        st.v[t] -= v_coef * grad[t - b0];
    }
    st.k += 1;
    for (std::size_t t = 0; t < st.y.size(); ++t)
        st.y[t] = sched.alpha * st.v[t] + (1.0 - sched.alpha) * st.x[t];
    st.history.push(st.k, st.y);
}

/// One RBCD step: x <- x - grad_i f(x) / L_i on block i.
inline void rbcd_step(const ProblemOracle& oracle, std::vector<double>& x, std::size_t block,
                      std::span<double> grad) {
    const auto& part = oracle.partition();
    oracle.block_gradient(block, x, grad);
    const double inv_L = 1.0 / oracle.params().L_blocks[block];
    const std::size_t b0 = part.begin(block);
    for (std::size_t t = b0; t < part.end(block); ++t) x[t] -= inv_L * grad[t - b0];
}

/// Drives the simulated-delay A2BCD iteration (the ground-truth engine for
/// the parallel runtime). With a zero DelaySchedule this is exactly NU_ACDM.
class A2bcdSimulator {
public:
    A2bcdSimulator(const ProblemOracle& oracle, const Schedule& sched, const DelaySchedule& delays,
                   std::uint64_t seed, std::vector<double> x0 = {})
        : oracle_(&oracle), sched_(&sched), delays_(&delays),
          state_(x0.empty() ? std::vector<double>(oracle.dim(), 0.0) : std::move(x0),
                 std::max(sched.tau, delays.max_delay())),
          sampler_(oracle.params(), seed),
          yhat_(oracle.dim()), grad_(max_block(oracle)) {}

    std::size_t step() {
        const std::size_t block = sampler_.sample();
        step_with_block(block);
        return block;
    }

    void step_with_block(std::size_t block) {
        assemble_delayed(oracle_->partition(), state_.history, *delays_, state_.k, yhat_);
        a2bcd_step(*oracle_, *sched_, state_, block,
                   yhat_, std::span<double>(grad_.data(), oracle_->partition().size(block)));
    }

    const DenseState& state() const { return state_; }
    const std::vector<double>& delayed_iterate() const { return yhat_; }  // last assembled

private:
    static std::size_t max_block(const ProblemOracle& o) {
        std::size_t m = 0;
        for (std::size_t i = 0; i < o.partition().n_blocks(); ++i)
            m = std::max(m, o.partition().size(i));
        return m;
    }

    const ProblemOracle* oracle_;
    const Schedule* sched_;
    const DelaySchedule* delays_;
    DenseState state_;
    BlockSampler sampler_;
    std::vector<double> yhat_;
    std::vector<double> grad_;
};

/// Synchronous NU_ACDM: the tau = 0 specialization, stepping directly at the
/// current y (no history machinery).
class NuAcdmSolver {
public:
    NuAcdmSolver(const ProblemOracle& oracle, std::uint64_t seed, std::vector<double> x0 = {})
        : oracle_(&oracle), sched_(make_schedule(oracle.params(), 0)),
          state_(x0.empty() ? std::vector<double>(oracle.dim(), 0.0) : std::move(x0), 0),
          sampler_(oracle.params(), seed), grad_(oracle.dim()) {}

    std::size_t step() {
        const std::size_t block = sampler_.sample();
        step_with_block(block);
        return block;
    }

    void step_with_block(std::size_t block) {
        a2bcd_step(*oracle_, sched_, state_, block, state_.y,
                   std::span<double>(grad_.data(), oracle_->partition().size(block)));
    }

    const DenseState& state() const { return state_; }
    const Schedule& schedule() const { return sched_; }

private:
    const ProblemOracle* oracle_;
    Schedule sched_;
    DenseState state_;
    BlockSampler sampler_;
    std::vector<double> grad_;
};

struct RunConfig {
    std::uint64_t budget = 0;
    std::uint64_t seed = 0;
    std::uint64_t checkpoint_every = 0;  ///< 0: one epoch (n_blocks iterations)
    std::vector<double> x0;              ///< empty: origin
    std::optional<double> f_star;        ///< overrides the oracle's value
    bool record_rho = true;              ///< only possible when x* is known
};

namespace detail {

inline double resolve_f_star(const ProblemOracle& oracle, const RunConfig& cfg) {
    if (cfg.f_star) return *cfg.f_star;
    if (auto fs = oracle.min_value()) return *fs;
    throw std::invalid_argument("no f* available: pass RunConfig::f_star (e.g. from presolve_f_star)");
}

template <typename StepFn, typename RowFn>
Trace run_loop(const ProblemOracle& oracle, const RunConfig& cfg, StepFn&& do_step, RowFn&& make_row) {
    if (cfg.budget < 1) throw std::invalid_argument("budget must be at least 1");
    const std::uint64_t cadence =
        cfg.checkpoint_every ? cfg.checkpoint_every : oracle.partition().n_blocks();
    Trace trace;
    trace.seed = cfg.seed;
    const auto t0 = std::chrono::steady_clock::now();
    trace.rows.push_back(make_row(std::uint64_t{0}));
    for (std::uint64_t k = 1; k <= cfg.budget; ++k) {
        do_step();
        if (k % cadence == 0 || k == cfg.budget) trace.rows.push_back(make_row(k));
    }
    trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return trace;
}

}  // namespace detail

inline Trace a2bcd_simulated_run(const ProblemOracle& oracle, const Schedule& sched,
                                 const DelaySchedule& delays, const RunConfig& cfg) {
    const double f_star = detail::resolve_f_star(oracle, cfg);
    A2bcdSimulator sim(oracle, sched, delays, cfg.seed, cfg.x0);
    std::optional<LyapunovMeter> meter;
    if (cfg.record_rho && oracle.minimizer())
        meter.emplace(sched, *oracle.minimizer(), f_star);
    Trace t = detail::run_loop(
        oracle, cfg, [&] { sim.step(); },
        [&](std::uint64_t k) {
            const auto& st = sim.state();
            TraceRow row;
            row.k = k;
            row.f_x_gap = oracle.value(st.x) - f_star;
            row.f_y_gap = oracle.value(st.y) - f_star;
            if (meter) {
                row.rho = meter->rho(st.v, row.f_x_gap + f_star, st.history, k);
                row.has_rho = true;
            }
            return row;
        });
    t.f_star = f_star;
    return t;
}

inline Trace nu_acdm_run(const ProblemOracle& oracle, const RunConfig& cfg) {
    const double f_star = detail::resolve_f_star(oracle, cfg);
    NuAcdmSolver solver(oracle, cfg.seed, cfg.x0);
    std::optional<LyapunovMeter> meter;
    if (cfg.record_rho && oracle.minimizer())
        meter.emplace(solver.schedule(), *oracle.minimizer(), f_star);
    Trace t = detail::run_loop(
        oracle, cfg, [&] { solver.step(); },
        [&](std::uint64_t k) {
            const auto& st = solver.state();
            TraceRow row;
            row.k = k;
            row.f_x_gap = oracle.value(st.x) - f_star;
            row.f_y_gap = oracle.value(st.y) - f_star;
            if (meter) {
                row.rho = meter->rho(st.v, row.f_x_gap + f_star, st.history, k);
                row.has_rho = true;
            }
            return row;
        });
    t.f_star = f_star;
    return t;
}

inline Trace rbcd_run(const ProblemOracle& oracle, const RunConfig& cfg) {
    const double f_star = detail::resolve_f_star(oracle, cfg);
    std::vector<double> x = cfg.x0.empty() ? std::vector<double>(oracle.dim(), 0.0) : cfg.x0;
    auto rng = make_rng(cfg.seed);
    std::vector<double> grad(oracle.dim());
    const std::size_t n = oracle.partition().n_blocks();
    Trace t = detail::run_loop(
        oracle, cfg,
        [&] {
            const std::size_t block = uniform_index(rng, n);
            rbcd_step(oracle, x, block,
                      std::span<double>(grad.data(), oracle.partition().size(block)));
        },
        [&](std::uint64_t k) {
            TraceRow row;
            row.k = k;
            row.f_x_gap = oracle.value(x) - f_star;
            row.f_y_gap = row.f_x_gap;  // RBCD has a single sequence
            return row;
        });
    t.f_star = f_star;
    return t;
}

/// High-accuracy pre-solve used when f* has no closed form: NU_ACDM until the
/// full gradient norm falls below tol * (1 + |grad f(x0)|). The returned value
/// is labeled oracle-derived in traces.
inline double presolve_f_star(const ProblemOracle& oracle, double grad_tol = 1e-12,
                              std::uint64_t max_iters = 50'000'000) {
    NuAcdmSolver solver(oracle, /*seed=*/0x5eedf00dULL);
    std::vector<double> g(oracle.dim());
    oracle.full_gradient(solver.state().y, g);
    double gn0 = 0;
    for (const double v : g) gn0 += v * v;
    const double target = grad_tol * (1.0 + std::sqrt(gn0));
    const std::size_t epoch = std::max<std::size_t>(oracle.partition().n_blocks(), 64);
    for (std::uint64_t k = 0; k < max_iters;) {
        for (std::size_t i = 0; i < epoch; ++i, ++k) solver.step();
        oracle.full_gradient(solver.state().y, g);
        double gn = 0;
        for (const double v : g) gn += v * v;
        if (std::sqrt(gn) <= target) return oracle.value(solver.state().y);
    }
    throw NumericError("presolve did not reach the requested gradient norm");
}

}  // namespace a2bcd

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "a2bcd/oracle.hpp"
#include "a2bcd/sampler.hpp"
#include "a2bcd/schedule.hpp"
#include "a2bcd/sparse_iteration.hpp"
#include "a2bcd/trace.hpp"

namespace a2bcd {

namespace detail {

/// Per-scalar atomic decrement; a zero decrement is skipped so zeroed
/// coefficients leave the cell bitwise untouched.
inline void atomic_sub(std::atomic<double>& a, double dec) {
    if (dec == 0.0) return;
    double cur = a.load(std::memory_order_relaxed);
    while (!a.compare_exchange_weak(cur, cur - dec, std::memory_order_relaxed)) {
    }
}

/// Version-stamped (B, B^{-1}) pair. Every entry is an atomic word and the
/// even/odd version protocol guarantees a reader never combines entries from
/// two different updates; writers serialize on an external mutex.
class StampedBasis {
public:
    StampedBasis() { store(Mat2::identity(), Mat2::identity()); }

    struct Snapshot {
        Mat2 B, Binv;
        std::uint64_t version;
    };

    Snapshot read(std::uint64_t* retries = nullptr) const {
        for (std::uint64_t spins = 0;; ++spins) {
            const std::uint64_t v1 = version_.load(std::memory_order_acquire);
            if ((v1 & 1) == 0) {
                Snapshot s;
                s.B = load_mat(cells_);
                s.Binv = load_mat(cells_ + 4);
                std::atomic_thread_fence(std::memory_order_acquire);
                if (version_.load(std::memory_order_relaxed) == v1) {
                    s.version = v1;
                    return s;
                }
            }
            if (retries) ++*retries;
            // a preempted writer can hold the odd version for a whole
            // scheduling quantum; spinning through it starves everyone
            if ((spins & 31) == 31) std::this_thread::yield();
        }
    }

    /// Caller holds the writer mutex.
    void write(const Mat2& B, const Mat2& Binv) {
        version_.fetch_add(1, std::memory_order_relaxed);
        std::atomic_thread_fence(std::memory_order_release);
        store(B, Binv);
        version_.fetch_add(1, std::memory_order_release);
    }

private:
    static Mat2 load_mat(const std::atomic<double>* c) {
        return {c[0].load(std::memory_order_relaxed), c[1].load(std::memory_order_relaxed),
                c[2].load(std::memory_order_relaxed), c[3].load(std::memory_order_relaxed)};
    }

    void store(const Mat2& B, const Mat2& Binv) {
        const double vals[8] = {B.a11, B.a12, B.a21, B.a22,
                                Binv.a11, Binv.a12, Binv.a21, Binv.a22};
        for (int i = 0; i < 8; ++i) cells_[i].store(vals[i], std::memory_order_relaxed);
    }

    std::atomic<std::uint64_t> version_{0};
    std::atomic<double> cells_[8];
};

/// Workers pause together while one of them rewrites the shared state.
/// Workers that finish their budget retire so the barrier never waits on a
/// dead thread.
class RestartGate {
public:
    explicit RestartGate(std::size_t workers) : active_(workers) {}

    bool pending() const { return pending_.load(std::memory_order_relaxed); }
    void request() { pending_.store(true, std::memory_order_relaxed); }

    template <typename Fn>
    void checkpoint(Fn&& do_restart) {
        if (!pending()) return;
        std::unique_lock lock(mu_);
        if (!pending_.load(std::memory_order_relaxed)) return;
        ++waiting_;
        if (waiting_ == active_) {
            do_restart();
            finish_locked();
        } else {
            const std::uint64_t gen = generation_;
            cv_.wait(lock, [&] { return generation_ != gen; });
        }
    }

    template <typename Fn>
    void retire(Fn&& do_restart) {
        std::unique_lock lock(mu_);
        --active_;
        if (pending_.load(std::memory_order_relaxed) && active_ > 0 && waiting_ == active_) {
            do_restart();
            finish_locked();
        }
        if (active_ == 0) pending_.store(false, std::memory_order_relaxed);
    }

private:
    void finish_locked() {
        pending_.store(false, std::memory_order_relaxed);
        waiting_ = 0;
        ++generation_;
        cv_.notify_all();
    }

    std::mutex mu_;
    std::condition_variable cv_;
    std::size_t active_, waiting_ = 0;
    std::uint64_t generation_ = 0;
    std::atomic<bool> pending_{false};
};

}  // namespace detail

struct ParallelOptions {
    std::size_t workers = 1;
    std::uint64_t budget = 0;            ///< max applied updates (0: no cap)
    double duration_seconds = 0;         ///< wall-clock cap (0: no cap)
    std::uint64_t seed = 0;
    std::uint64_t restart_period = 0;    ///< 0: default_restart_period(schedule)
    std::uint64_t checkpoint_every = 0;  ///< single-worker cadence (0: one epoch)
    double monitor_interval = 0.05;      ///< seconds between monitor samples (workers >= 2)
    std::size_t staleness_cap = 0;       ///< 0: unthrottled; else cooperative bound on staleness
    std::optional<double> f_star;        ///< needed for trace gaps unless the oracle knows f*
    std::vector<double> x0;              ///< start (y0 = v0 = x0); empty: origin
    bool dry_run = false;                ///< zero update coefficients, measure staleness only
    bool record_staleness_sequence = false;
};

struct StalenessSummary {
    std::vector<std::uint64_t> histogram;  ///< histogram[s] = #updates applied with staleness s
    std::size_t max_observed = 0;
    std::uint64_t samples = 0;
    std::uint64_t seqlock_retries = 0;     ///< basis snapshots retried on a version mismatch
    std::uint64_t throttle_retries = 0;

    void to_csv(std::ostream& out) const {
        out << "staleness,count\n";
        for (std::size_t s = 0; s < histogram.size(); ++s)
            if (histogram[s]) out << s << ',' << histogram[s] << '\n';
    }
};

struct ParallelResult {
    Trace trace;
    StalenessSummary staleness;
    std::vector<double> y, v;  ///< exact final iterates, recovered after quiescence
    std::vector<double> p, q, ap, aq;  ///< raw shared vectors at the end
    double f_y_gap = 0;
    std::uint64_t iterations = 0;
    double wall_seconds = 0;
    std::vector<std::uint32_t> staleness_sequence;  ///< per applied update, when recorded
};

/// Shared-memory asynchronous A2BCD over the sparsified (p, q, B) variables.
///
/// Vector cells are independent atomic words and snapshots may mix iterates
/// (the inconsistent-read model); the 2x2 basis B and its inverse are the one
/// mutex-serialized piece, snapshotted through a version stamp so no torn
/// (B, b) pair is ever used. Oracles declaring an affine gradient get A*p and
/// A*q maintained incrementally; anything else reconstructs a dense iterate
/// per step, which costs O(d).
///
/// With one worker the run is fully deterministic: checkpoint rows are taken
/// by iteration count and record seconds = 0. With two or more workers a
/// monitor thread samples at wall-clock intervals.
inline ParallelResult run_parallel(const ProblemOracle& oracle, const Schedule& sched,
                                   const ParallelOptions& opt) {
    using clock = std::chrono::steady_clock;
    if (opt.workers < 1) throw std::invalid_argument("need at least one worker");
    if (opt.budget == 0 && opt.duration_seconds <= 0)
        throw std::invalid_argument("need an iteration budget or a duration");

    const std::size_t d = oracle.dim();
    const auto& part = oracle.partition();
    const auto* affine = dynamic_cast<const AffineGradientStructure*>(&oracle);
    const std::size_t m = affine ? affine->design_matrix().rows() : 0;

    double f_star = 0;
    if (!opt.dry_run) {
        if (opt.f_star) f_star = *opt.f_star;
        else if (auto fs = oracle.min_value()) f_star = *fs;
        else throw std::invalid_argument("no f* available for trace gaps; pass ParallelOptions::f_star");
    }

    std::vector<std::atomic<double>> p(d), q(d), Ap(m), Aq(m);
    {
        std::vector<double> x0 = opt.x0.empty() ? std::vector<double>(d, 0.0) : opt.x0;
        if (x0.size() != d) throw std::invalid_argument("x0 dimension mismatch");
        for (std::size_t t = 0; t < d; ++t) {
            p[t].store(x0[t], std::memory_order_relaxed);
            q[t].store(x0[t], std::memory_order_relaxed);
        }
        if (affine) {
            std::vector<double> ax(m, 0.0);
            affine->design_matrix().add_product(x0, 1.0, ax);
            for (std::size_t r = 0; r < m; ++r) {
                Ap[r].store(ax[r], std::memory_order_relaxed);
                Aq[r].store(ax[r], std::memory_order_relaxed);
            }
        }
    }

    detail::StampedBasis basis;
    std::mutex basis_mu;
    Mat2 B_master = Mat2::identity();     // guarded by basis_mu
    Mat2 Binv_master = Mat2::identity();  // maintained as B^{-1} incrementally
    std::mutex monitor_mu;             // excludes monitor snapshots during restarts
    detail::RestartGate gate(opt.workers);
    std::atomic<std::uint64_t> counter{0};
    std::atomic<bool> stop{false};
    std::atomic<std::uint64_t> seqlock_retries{0};
    const std::uint64_t restart_period =
        opt.restart_period ? opt.restart_period : default_restart_period(sched);
    std::atomic<std::uint64_t> next_restart{restart_period};
    const Mat2 M = iteration_matrix(sched);
    const Mat2 M_inv = iteration_matrix_inverse(sched);

    std::exception_ptr failure;
    std::mutex failure_mu;
    auto note_failure = [&] {
        std::lock_guard lk(failure_mu);
        if (!failure) failure = std::current_exception();
        stop.store(true, std::memory_order_relaxed);
    };

    const auto t_start = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t_start).count(); };

    // Quiesced rewrite: p <- y, q <- v (likewise Ap/Aq), B <- I; O(d + m).
    // Dry runs reset only B: their p/q were never rotated and must stay put.
    auto do_restart = [&] {
        std::lock_guard mon(monitor_mu);
        std::lock_guard lk(basis_mu);
        if (!opt.dry_run) {
            const Mat2 B = B_master;
            for (std::size_t t = 0; t < d; ++t) {
                const double pv = p[t].load(std::memory_order_relaxed);
                const double qv = q[t].load(std::memory_order_relaxed);
                p[t].store(B.a11 * pv + B.a12 * qv, std::memory_order_relaxed);
                q[t].store(B.a21 * pv + B.a22 * qv, std::memory_order_relaxed);
            }
            for (std::size_t r = 0; r < m; ++r) {
                const double pv = Ap[r].load(std::memory_order_relaxed);
                const double qv = Aq[r].load(std::memory_order_relaxed);
                Ap[r].store(B.a11 * pv + B.a12 * qv, std::memory_order_relaxed);
                Aq[r].store(B.a21 * pv + B.a22 * qv, std::memory_order_relaxed);
            }
        }
        B_master = Mat2::identity();
        Binv_master = Mat2::identity();
        basis.write(B_master, Binv_master);
        const std::uint64_t k = counter.load(std::memory_order_relaxed);
        next_restart.store((k / restart_period + 1) * restart_period, std::memory_order_relaxed);
    };

    auto snapshot_yv = [&](std::vector<double>& y, std::vector<double>& v) {
        const Mat2 B = basis.read().B;
        y.resize(d);
        v.resize(d);
        for (std::size_t t = 0; t < d; ++t) {
            const double pv = p[t].load(std::memory_order_relaxed);
            const double qv = q[t].load(std::memory_order_relaxed);
            y[t] = B.a11 * pv + B.a12 * qv;
            v[t] = B.a21 * pv + B.a22 * qv;
        }
    };

    ParallelResult result;
    result.trace.seed = opt.seed;
    const std::uint64_t cadence = opt.checkpoint_every ? opt.checkpoint_every : part.n_blocks();
    std::mutex trace_mu;

    auto record_row = [&](std::uint64_t k, double seconds) {
        std::vector<double> y, v;
        {
            std::lock_guard mon(monitor_mu);
            snapshot_yv(y, v);
        }
        TraceRow row;
        row.k = k;
        row.seconds = seconds;
        row.f_y_gap = oracle.value(y) - f_star;
        for (std::size_t t = 0; t < d; ++t)
            y[t] = (y[t] - sched.alpha * v[t]) / (1.0 - sched.alpha);  // x from (y, v)
        row.f_x_gap = oracle.value(y) - f_star;
        std::lock_guard lk(trace_mu);
        result.trace.rows.push_back(row);
    };

    struct WorkerStats {
        std::vector<std::uint64_t> hist;
        std::size_t max_stale = 0;
        std::uint64_t samples = 0;
        std::uint64_t throttle_retries = 0;
        std::vector<std::pair<std::uint64_t, std::uint32_t>> sequence;
    };
    std::vector<WorkerStats> stats(opt.workers);

    const auto alias_table = std::make_shared<const AliasTable>(oracle.params());

    auto worker_body = [&](std::size_t w) {
        BlockSampler sampler(alias_table, opt.seed, w);
        std::size_t max_block = 0;
        for (std::size_t i = 0; i < part.n_blocks(); ++i) max_block = std::max(max_block, part.size(i));
        std::vector<double> grad(max_block), ph, qh, Aph, Aqh, yhat, u1, u2;
        if (affine) {
            ph.resize(max_block);
            qh.resize(max_block);
            u1.resize(max_block);
            u2.resize(max_block);
            Aph.resize(m);
            Aqh.resize(m);
        } else {
            yhat.resize(d);
        }
        WorkerStats& st = stats[w];
        std::uint64_t local_retries = 0;
        std::uint64_t since_time_check = 0;

        while (!stop.load(std::memory_order_relaxed)) {
            gate.checkpoint(do_restart);
            if (opt.budget && counter.load(std::memory_order_relaxed) >= opt.budget) break;
            if (opt.duration_seconds > 0 && ++since_time_check >= 64) {
                since_time_check = 0;
                if (elapsed() >= opt.duration_seconds) {
                    stop.store(true, std::memory_order_relaxed);
                    break;
                }
            }

            const std::size_t block = sampler.sample();
            const std::size_t b0 = part.begin(block), bs = part.size(block);

            // read -> gradient -> reserve; the throttle rereads on staleness
            // overflow so the applied update never exceeds the cap
            std::uint64_t kw = 0;
            bool reserved = false;
            while (!reserved) {
                const std::uint64_t k_read = counter.load(std::memory_order_acquire);
                const auto snap = basis.read(&local_retries);

                if (affine) {
                    for (std::size_t j = 0; j < bs; ++j) {
                        ph[j] = p[b0 + j].load(std::memory_order_relaxed);
                        qh[j] = q[b0 + j].load(std::memory_order_relaxed);
                    }
                    for (std::size_t r = 0; r < m; ++r) {
                        Aph[r] = Ap[r].load(std::memory_order_relaxed);
                        Aqh[r] = Aq[r].load(std::memory_order_relaxed);
                    }
                    const auto& A = affine->design_matrix();
                    std::fill(u1.begin(), u1.begin() + static_cast<std::ptrdiff_t>(bs), 0.0);
                    std::fill(u2.begin(), u2.begin() + static_cast<std::ptrdiff_t>(bs), 0.0);
                    A.add_block_transpose_product(part, block, Aph, 1.0, std::span(u1.data(), bs));
                    A.add_block_transpose_product(part, block, Aqh, 1.0, std::span(u2.data(), bs));
                    const double cq = affine->coef_quadratic(), ci = affine->coef_identity();
                    const auto lin = affine->linear_term();
                    for (std::size_t j = 0; j < bs; ++j) {
                        const double yj = snap.B.a11 * ph[j] + snap.B.a12 * qh[j];
                        const double ayj = snap.B.a11 * u1[j] + snap.B.a12 * u2[j];
                        grad[j] = cq * ayj + ci * yj + lin[b0 + j];
                    }
                } else {
                    for (std::size_t j = 0; j < d; ++j) {
                        const double pv = p[j].load(std::memory_order_relaxed);
                        const double qv = q[j].load(std::memory_order_relaxed);
                        yhat[j] = snap.B.a11 * pv + snap.B.a12 * qv;
                    }
                    oracle.block_gradient(block, yhat, std::span(grad.data(), bs));
                }

                if (opt.staleness_cap == 0) {
                    kw = counter.fetch_add(1, std::memory_order_acq_rel);
                    reserved = true;
                } else {
                    std::uint64_t cur = counter.load(std::memory_order_relaxed);
                    for (;;) {
                        if (cur - k_read > opt.staleness_cap) break;
                        if (counter.compare_exchange_weak(cur, cur + 1, std::memory_order_acq_rel)) {
                            kw = cur;
                            reserved = true;
                            break;
                        }
                    }
                    if (!reserved) {
                        ++st.throttle_retries;
                        if (stop.load(std::memory_order_relaxed)) break;
                        gate.checkpoint(do_restart);
                    }
                }
                if (reserved) {
                    const auto stale = static_cast<std::size_t>(kw - k_read);
                    if (stale >= st.hist.size()) st.hist.resize(stale + 1, 0);
                    ++st.hist[stale];
                    st.max_stale = std::max(st.max_stale, stale);
                    ++st.samples;
                    if (opt.record_staleness_sequence)
                        st.sequence.emplace_back(
                            kw, static_cast<std::uint32_t>(std::min<std::size_t>(stale, 0xffffffffu)));
                }
            }
            if (!reserved) break;  // stopped mid-throttle

            // B <- M B, b <- b M^{-1}; the freshly published b drives the update
            Mat2 binv;
            {
                std::lock_guard lk(basis_mu);
                B_master = M * B_master;
                Binv_master = Binv_master * M_inv;
                binv = Binv_master;
                basis.write(B_master, binv);
            }
            if (!std::isfinite(binv.a11) || !std::isfinite(binv.a22))
                throw NumericError("basis inverse overflowed; restart period too large");

            const UpdateCoeffs dc =
                opt.dry_run ? UpdateCoeffs{0.0, 0.0} : update_coeffs(sched, oracle.params(), block);
            const double wp = binv.a11 * dc.D1 + binv.a12 * dc.D2;
            const double wq = binv.a21 * dc.D1 + binv.a22 * dc.D2;
            for (std::size_t j = 0; j < bs; ++j) {
                detail::atomic_sub(p[b0 + j], wp * grad[j]);
                detail::atomic_sub(q[b0 + j], wq * grad[j]);
            }
            if (affine) {
                const auto& A = affine->design_matrix();
                for (std::size_t c = b0; c < b0 + bs; ++c) {
                    const double gc = grad[c - b0];
                    if (gc == 0.0) continue;
                    for (std::size_t t = A.col_begin(c); t < A.col_end(c); ++t) {
                        const double inc = A.value(t) * gc;
                        detail::atomic_sub(Ap[A.row_index(t)], wp * inc);
                        detail::atomic_sub(Aq[A.row_index(t)], wq * inc);
                    }
                }
            }

            if (kw + 1 >= next_restart.load(std::memory_order_relaxed)) gate.request();

            if (opt.workers == 1 && !opt.dry_run && (kw + 1) % cadence == 0)
                record_row(kw + 1, 0.0);
        }

        seqlock_retries.fetch_add(local_retries, std::memory_order_relaxed);
    };

    if (opt.workers == 1 && !opt.dry_run) record_row(0, 0.0);

    std::vector<std::thread> threads;
    threads.reserve(opt.workers);
    for (std::size_t w = 0; w < opt.workers; ++w)
        threads.emplace_back([&, w] {
            try {
                worker_body(w);
            } catch (...) {
                note_failure();
            }
            gate.retire(do_restart);
        });

    std::thread monitor;
    if (opt.workers >= 2 && !opt.dry_run) {
        monitor = std::thread([&] {
            try {
                record_row(counter.load(std::memory_order_relaxed), elapsed());
                double next_sample = opt.monitor_interval;
                while (!stop.load(std::memory_order_relaxed)) {
                    std::this_thread::sleep_for(std::chrono::milliseconds(5));
                    const double now = elapsed();
                    if (opt.duration_seconds > 0 && now >= opt.duration_seconds)
                        stop.store(true, std::memory_order_relaxed);
                    if (now >= next_sample) {
                        record_row(counter.load(std::memory_order_relaxed), now);
                        next_sample = now + opt.monitor_interval;
                    }
                }
            } catch (...) {
                note_failure();
            }
        });
    }

    for (auto& t : threads) t.join();
    stop.store(true, std::memory_order_relaxed);
    if (monitor.joinable()) monitor.join();
    if (failure) std::rethrow_exception(failure);

    result.wall_seconds = elapsed();
    result.iterations = counter.load(std::memory_order_relaxed);
    snapshot_yv(result.y, result.v);
    result.p.resize(d);
    result.q.resize(d);
    for (std::size_t t = 0; t < d; ++t) {
        result.p[t] = p[t].load(std::memory_order_relaxed);
        result.q[t] = q[t].load(std::memory_order_relaxed);
    }
    result.ap.resize(m);
    result.aq.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
        result.ap[r] = Ap[r].load(std::memory_order_relaxed);
        result.aq[r] = Aq[r].load(std::memory_order_relaxed);
    }
    if (!opt.dry_run) {
        result.f_y_gap = oracle.value(result.y) - f_star;
        const bool aligned = !result.trace.rows.empty() &&
                             result.trace.rows.back().k == result.iterations;
        if (!aligned)
            record_row(result.iterations, opt.workers == 1 ? 0.0 : result.wall_seconds);
        result.trace.wall_seconds = result.wall_seconds;
        result.trace.f_star = f_star;
    }

    // merge worker stats
    for (auto& st : stats) {
        if (st.hist.size() > result.staleness.histogram.size())
            result.staleness.histogram.resize(st.hist.size(), 0);
        for (std::size_t s = 0; s < st.hist.size(); ++s) result.staleness.histogram[s] += st.hist[s];
        result.staleness.max_observed = std::max(result.staleness.max_observed, st.max_stale);
        result.staleness.samples += st.samples;
        result.staleness.throttle_retries += st.throttle_retries;
    }
    result.staleness.seqlock_retries = seqlock_retries.load(std::memory_order_relaxed);
    if (opt.record_staleness_sequence) {
        std::vector<std::pair<std::uint64_t, std::uint32_t>> all;
        for (auto& st : stats)
            all.insert(all.end(), st.sequence.begin(), st.sequence.end());
        std::sort(all.begin(), all.end());
        result.staleness_sequence.reserve(all.size());
        for (const auto& [k, s] : all) result.staleness_sequence.push_back(s);
    }
    return result;
}

/// Estimates the realistic maximum delay: the full read/compute/write loop
/// with update magnitudes zeroed (solution vectors never change numerically)
/// while staleness is recorded. Returns max(k_write - k_read).
inline std::size_t dry_run_tau(const ProblemOracle& oracle, std::size_t workers,
                               double duration_seconds, std::uint64_t seed = 0) {
    if (!(duration_seconds > 0)) throw std::invalid_argument("dry run needs a positive duration");
    ParallelOptions opt;
    opt.workers = workers;
    opt.duration_seconds = duration_seconds;
    opt.seed = seed;
    opt.dry_run = true;
    const Schedule sched = make_schedule(oracle.params(), 0);
    return run_parallel(oracle, sched, opt).staleness.max_observed;
}

}  // namespace a2bcd

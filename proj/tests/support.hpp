#pragma once

// Shared helpers for the test suites.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <thread>
#include <vector>

#include "a2bcd/oracle.hpp"
#include "a2bcd/rng.hpp"

namespace testsupport {

/// Wraps an oracle adding a constant to f; used for the affine-invariance
/// checks (iterates must not change, only reported values shift).
class OffsetOracle final : public a2bcd::ProblemOracle {
public:
    OffsetOracle(const a2bcd::ProblemOracle& inner, double offset)
        : inner_(&inner), offset_(offset) {}

    std::size_t dim() const override { return inner_->dim(); }
    const a2bcd::BlockPartition& partition() const override { return inner_->partition(); }
    const a2bcd::ProblemParams& params() const override { return inner_->params(); }
    void block_gradient(std::size_t b, std::span<const double> x,
                        std::span<double> g) const override {
        inner_->block_gradient(b, x, g);
    }
    double value(std::span<const double> x) const override { return inner_->value(x) + offset_; }
    const std::vector<double>* minimizer() const override { return inner_->minimizer(); }
    std::optional<double> min_value() const override {
        auto v = inner_->min_value();
        return v ? std::optional(*v + offset_) : std::nullopt;
    }

private:
    const a2bcd::ProblemOracle* inner_;
    double offset_;
};

/// Oracle that starts failing after a set number of gradient calls; exercises
/// the parallel runtime's abort path.
class FailingOracle final : public a2bcd::ProblemOracle {
public:
    FailingOracle(const a2bcd::ProblemOracle& inner, std::uint64_t fail_after)
        : inner_(&inner), remaining_(fail_after) {}

    std::size_t dim() const override { return inner_->dim(); }
    const a2bcd::BlockPartition& partition() const override { return inner_->partition(); }
    const a2bcd::ProblemParams& params() const override { return inner_->params(); }
    void block_gradient(std::size_t b, std::span<const double> x,
                        std::span<double> g) const override {
        if (remaining_.fetch_sub(1) == 0) throw std::runtime_error("oracle failure injected");
        inner_->block_gradient(b, x, g);
    }
    double value(std::span<const double> x) const override { return inner_->value(x); }
    std::optional<double> min_value() const override { return inner_->min_value(); }
    const std::vector<double>* minimizer() const override { return inner_->minimizer(); }

private:
    const a2bcd::ProblemOracle* inner_;
    mutable std::atomic<std::uint64_t> remaining_;
};

inline double max_rel_deviation(std::span<const double> a, std::span<const double> b) {
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double scale = 1.0 + std::max(std::abs(a[i]), std::abs(b[i]));
        worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
    }
    return worst;
}

inline double norm2(std::span<const double> v) {
    double s = 0;
    for (const double x : v) s += x * x;
    return std::sqrt(s);
}

/// Hammers a vector of atomic doubles with two full-word sentinel patterns
/// from `writers` threads while readers assert every observed value is one of
/// the sentinels. Returns the number of torn (mixed-bit) reads seen.
inline std::uint64_t sentinel_torn_reads(std::size_t writers, std::size_t readers,
                                         double seconds, std::size_t cells = 256) {
    const double s1 = -0x1.5555555555555p+13;  // 0xC0D5555555555555
    const double s2 = 0x1.aaaaaaaaaaaaap-9;    // distinct bit pattern
    std::vector<std::atomic<double>> v(cells);
    for (auto& c : v) c.store(s1);
    std::atomic<bool> stop{false};
    std::atomic<std::uint64_t> torn{0};

    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < writers; ++w)
        threads.emplace_back([&, w] {
            auto rng = a2bcd::make_rng(99, w);
            while (!stop.load(std::memory_order_relaxed)) {
                const std::size_t i = a2bcd::uniform_index(rng, cells);
                v[i].store((rng() & 1) ? s1 : s2, std::memory_order_relaxed);
            }
        });
    for (std::size_t r = 0; r < readers; ++r)
        threads.emplace_back([&, r] {
            auto rng = a2bcd::make_rng(7, r);
            while (!stop.load(std::memory_order_relaxed)) {
                const std::size_t i = a2bcd::uniform_index(rng, cells);
                const double x = v[i].load(std::memory_order_relaxed);
                if (x != s1 && x != s2) torn.fetch_add(1, std::memory_order_relaxed);
            }
        });
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    stop.store(true);
    for (auto& t : threads) t.join();
    return torn.load();
}

}  // namespace testsupport

#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "a2bcd/rng.hpp"

namespace a2bcd {

/// Deterministic map (iteration k, block i) -> staleness j(k, i) <= tau for
/// the simulated-delay engine. Staleness never exceeds k itself (reads never
/// precede y_0; earlier history clamps to y_0 downstream).
///
/// Modes:
///   zero           j == 0 everywhere (the synchronous specialization)
///   constant       j == tau for every (k, i)
///   uniform_random j ~ U{0..tau}, hashed from (seed, k, i) so the value is
///                  independent of evaluation order and replayable
///   recorded       j == sequence[k] for all blocks (consistent-read replay
///                  of staleness measured by the parallel runtime)
class DelaySchedule {
public:
    static DelaySchedule zero() { return DelaySchedule(Mode::kZero, 0, 0, {}); }

    static DelaySchedule constant(std::size_t tau) {
        return DelaySchedule(Mode::kConstant, tau, 0, {});
    }

    static DelaySchedule uniform_random(std::size_t tau, std::uint64_t seed) {
        return DelaySchedule(Mode::kUniform, tau, seed, {});
    }

    static DelaySchedule recorded(std::vector<std::uint32_t> sequence) {
        std::size_t tau = 0;
        for (const auto s : sequence) tau = std::max<std::size_t>(tau, s);
        return DelaySchedule(Mode::kRecorded, tau, 0, std::move(sequence));
    }

    std::size_t staleness(std::uint64_t k, std::size_t block) const {
        std::size_t j = 0;
        switch (mode_) {
            case Mode::kZero: j = 0; break;
            case Mode::kConstant: j = tau_; break;
            case Mode::kUniform:
                j = static_cast<std::size_t>(mix64(seed_ ^ mix64(k) ^ mix64(0x9e3779b9ULL + block)) %
                                             (tau_ + 1));
                break;
            case Mode::kRecorded:
                j = k < sequence_.size() ? sequence_[k] : 0;
                break;
        }
        return std::min<std::size_t>(j, static_cast<std::size_t>(std::min<std::uint64_t>(k, tau_)));
    }

    /// Upper bound on staleness; sizes history buffers.
    std::size_t max_delay() const { return tau_; }

private:
    enum class Mode { kZero, kConstant, kUniform, kRecorded };

    DelaySchedule(Mode mode, std::size_t tau, std::uint64_t seed, std::vector<std::uint32_t> seq)
        : mode_(mode), tau_(tau), seed_(seed), sequence_(std::move(seq)) {}

    Mode mode_;
    std::size_t tau_;
    std::uint64_t seed_;
    std::vector<std::uint32_t> sequence_;
};

}  // namespace a2bcd

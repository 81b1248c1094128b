#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace a2bcd {

/// Ring of the last tau+1 y-vectors, indexed by iteration number. Queries
/// below iteration 0 clamp to y_0 (the algorithm's convention for history
/// before the start); queries older than the window are a logic error.
class YHistory {
public:
    YHistory(std::size_t tau, const std::vector<double>& y0)
        : span_(tau + 1), slots_(tau + 1), latest_(0) {
        slots_[0] = y0;
    }

    std::size_t window() const { return span_; }
    std::uint64_t latest() const { return latest_; }

    /// Record y_k; k must be latest()+1.
    void push(std::uint64_t k, const std::vector<double>& y) {
        if (k != latest_ + 1) throw std::logic_error("history pushes must be consecutive");
        slots_[k % span_] = y;
        latest_ = k;
    }

    /// y_k for k in [latest-tau, latest]; negative k clamps to y_0.
    const std::vector<double>& at(std::int64_t k) const {
        if (k < 0) k = 0;
        const auto uk = static_cast<std::uint64_t>(k);
        if (uk > latest_ || uk + span_ <= latest_)
            throw std::logic_error("history query outside the retained window");
        return slots_[uk % span_];
    }

private:
    std::size_t span_;
    std::vector<std::vector<double>> slots_;
    std::uint64_t latest_;
};

}  // namespace a2bcd

#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "a2bcd/params.hpp"
#include "a2bcd/rng.hpp"

namespace a2bcd {

/// Walker/Vose alias table for the nonuniform block distribution
/// p_j = sqrt(L_j) / S. Sampling is the innermost operation of every
/// iteration, so draws are O(1): one index, one uniform, one compare.
class AliasTable {
public:
    explicit AliasTable(const ProblemParams& params) : AliasTable(sqrt_weights(params)) {}

    explicit AliasTable(const std::vector<double>& weights) {
        const std::size_t n = weights.size();
        prob_.assign(n, 0.0);
        alias_.assign(n, 0);
        probabilities_.assign(n, 0.0);
        double total = 0;
        for (const double w : weights) total += w;
        std::vector<double> scaled(n);
        std::vector<std::size_t> small, large;
        for (std::size_t i = 0; i < n; ++i) {
            probabilities_[i] = weights[i] / total;
            scaled[i] = probabilities_[i] * static_cast<double>(n);
            (scaled[i] < 1.0 ? small : large).push_back(i);
        }
        while (!small.empty() && !large.empty()) {
            const std::size_t s = small.back(); small.pop_back();
            const std::size_t l = large.back(); large.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            (scaled[l] < 1.0 ? small : large).push_back(l);
        }
        for (const std::size_t i : large) prob_[i] = 1.0;
        for (const std::size_t i : small) prob_[i] = 1.0;  // numerical leftovers
    }

    std::size_t draw(std::mt19937_64& rng) const {
        const std::size_t i = uniform_index(rng, prob_.size());
        return uniform01(rng) < prob_[i] ? i : alias_[i];
    }

    const std::vector<double>& probabilities() const { return probabilities_; }

private:
    static std::vector<double> sqrt_weights(const ProblemParams& params) {
        std::vector<double> w(params.L_blocks.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::sqrt(params.L_blocks[i]);
        return w;
    }

    std::vector<double> prob_;
    std::vector<std::size_t> alias_;
    std::vector<double> probabilities_;
};

/// One sampler per worker thread: the immutable alias table can be shared
/// across workers, the RNG stream is private. Streams derive as seed + index.
class BlockSampler {
public:
    BlockSampler(const ProblemParams& params, std::uint64_t seed, std::uint64_t stream = 0)
        : table_(std::make_shared<AliasTable>(params)), rng_(make_rng(seed, stream)) {}

    BlockSampler(std::shared_ptr<const AliasTable> table, std::uint64_t seed, std::uint64_t stream = 0)
        : table_(std::move(table)), rng_(make_rng(seed, stream)) {}

    std::size_t sample() { return table_->draw(rng_); }

    const std::vector<double>& probabilities() const { return table_->probabilities(); }
    std::shared_ptr<const AliasTable> table() const { return table_; }

private:
    std::shared_ptr<const AliasTable> table_;
    std::mt19937_64 rng_;
};

}  // namespace a2bcd

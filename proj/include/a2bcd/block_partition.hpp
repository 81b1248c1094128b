#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace a2bcd {

/// Partition of the coordinate range [0, d) into contiguous blocks.
/// Block i covers [offsets[i], offsets[i+1]).
class BlockPartition {
public:
    explicit BlockPartition(std::vector<std::size_t> offsets) : offsets_(std::move(offsets)) {
        if (offsets_.size() < 3) throw std::invalid_argument("partition needs at least 2 blocks");
        if (offsets_.front() != 0) throw std::invalid_argument("partition must start at 0");
        for (std::size_t i = 1; i < offsets_.size(); ++i)
            if (offsets_[i] <= offsets_[i - 1])
                throw std::invalid_argument("partition offsets must be strictly increasing");
    }

    /// Blocks of `block_size` coordinates; the last block keeps the remainder.
    static BlockPartition uniform(std::size_t dim, std::size_t block_size) {
        if (block_size == 0 || dim <= block_size)
            throw std::invalid_argument("block_size must be in [1, dim) to give >= 2 blocks");
        std::vector<std::size_t> off;
        for (std::size_t p = 0; p < dim; p += block_size) off.push_back(p);
        off.push_back(dim);
        return BlockPartition(std::move(off));
    }

    std::size_t n_blocks() const { return offsets_.size() - 1; }
    std::size_t dim() const { return offsets_.back(); }
    std::size_t begin(std::size_t i) const { return offsets_[i]; }
    std::size_t end(std::size_t i) const { return offsets_[i + 1]; }
    std::size_t size(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }

    /// Block containing coordinate j (binary search).
    std::size_t block_of(std::size_t j) const {
        std::size_t lo = 0, hi = n_blocks() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (j < offsets_[mid + 1]) hi = mid; else lo = mid + 1;
        }
        return lo;
    }

    const std::vector<std::size_t>& offsets() const { return offsets_; }

private:
    std::vector<std::size_t> offsets_;
};

}  // namespace a2bcd

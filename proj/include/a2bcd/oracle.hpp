#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "a2bcd/block_partition.hpp"
#include "a2bcd/params.hpp"
#include "a2bcd/sparse_matrix.hpp"

namespace a2bcd {

/// A block-structured objective: f value, per-block gradients, and the
/// constants the schedules consume. Implementations must be safe for
/// concurrent read-only use (no mutable state in block_gradient / value).
class ProblemOracle {
public:
    virtual ~ProblemOracle() = default;

    virtual std::size_t dim() const = 0;
    virtual const BlockPartition& partition() const = 0;
    virtual const ProblemParams& params() const = 0;

    /// Writes the block-`block` slice of grad f(point) into `out`
    /// (out.size() == partition().size(block)).
    virtual void block_gradient(std::size_t block, std::span<const double> point,
                                std::span<double> out) const = 0;

    virtual double value(std::span<const double> point) const = 0;

    /// Known minimizer, when the problem has a closed form; nullptr otherwise.
    virtual const std::vector<double>* minimizer() const { return nullptr; }
    virtual std::optional<double> min_value() const { return std::nullopt; }

    void full_gradient(std::span<const double> point, std::span<double> out) const {
        const auto& part = partition();
        for (std::size_t i = 0; i < part.n_blocks(); ++i)
            block_gradient(i, point, out.subspan(part.begin(i), part.size(i)));
    }
};

/// Declared by oracles whose gradient is affine with a sparse design matrix:
///
///   grad_i f(y) = cq * A_i^T (A y) + ci * y_(i) + t_(i)
///
/// The parallel runtime uses this to maintain A*p / A*q products so block
/// gradients cost O(nnz(A_i) + |block|) instead of O(d).
class AffineGradientStructure {
public:
    virtual ~AffineGradientStructure() = default;
    virtual const SparseColumnMatrix& design_matrix() const = 0;
    virtual double coef_quadratic() const = 0;   ///< cq
    virtual double coef_identity() const = 0;    ///< ci
    virtual std::span<const double> linear_term() const = 0;  ///< t, length d
};

/// Max abs deviation between the oracle's block gradient and central finite
/// differences of f over the block's coordinates.
inline double check_block_gradient(const ProblemOracle& oracle, std::size_t block,
                                   std::span<const double> point, double step) {
    if (!(step > 0)) throw std::invalid_argument("finite-difference step must be positive");
    const auto& part = oracle.partition();
    std::vector<double> x(point.begin(), point.end());
    std::vector<double> g(part.size(block));
    oracle.block_gradient(block, x, g);
    double worst = 0;
    for (std::size_t j = part.begin(block); j < part.end(block); ++j) {
        const double saved = x[j];
        x[j] = saved + step;
        const double fp = oracle.value(x);
        x[j] = saved - step;
        const double fm = oracle.value(x);
        x[j] = saved;
        const double fd = (fp - fm) / (2 * step);
        const double dev = std::abs(fd - g[j - part.begin(block)]);
        if (dev > worst) worst = dev;
    }
    return worst;
}

}  // namespace a2bcd

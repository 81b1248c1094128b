#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "a2bcd/oracle.hpp"

namespace a2bcd {

/// The block-separable worst-case problem certifying the complexity lower
/// bound: per block,
///
///   f_i(x) = (L_i - sigma)/4 * (1/2 <x, A_i x> - <e_1, x>) + sigma/2 |x|^2
///
/// with A_i tridiagonal (diagonal 2, ..., 2, theta_i; off-diagonal -1),
/// theta_i = (sqrt(kappa_i) + 3)/(sqrt(kappa_i) + 1). The unique minimizer is
/// x*_(i) = (q_i, q_i^2, ..., q_i^b) for q_i = (sqrt(kappa_i) - 1)/(sqrt(kappa_i) + 1).
/// Gradients propagate exact zeros, so a solver's iterates gain at most one
/// new nonzero coordinate per update to a block.
class WorstCaseProblem final : public ProblemOracle {
public:
    WorstCaseProblem(double sigma, std::vector<double> L_list, std::size_t b)
        : part_(BlockPartition::uniform(L_list.size() * b, b)), block_size_(b) {
        if (b < 2) throw std::invalid_argument("worst-case construction needs block size >= 2");
        if (L_list.size() < 2) throw std::invalid_argument("need at least 2 blocks");
        if (!(sigma > 0)) throw std::invalid_argument("sigma must be positive");
        for (const double Li : L_list)
            if (!(Li > sigma))
                throw std::invalid_argument("worst-case construction needs sigma < L_i (kappa_i > 1)");

        q_.resize(L_list.size());
        theta_.resize(L_list.size());
        x_star_.resize(part_.dim());
        for (std::size_t i = 0; i < L_list.size(); ++i) {
            const double rk = std::sqrt(L_list[i] / sigma);
            q_[i] = (rk - 1.0) / (rk + 1.0);
            theta_[i] = (rk + 3.0) / (rk + 1.0);
            double p = 1.0;
            for (std::size_t j = 0; j < b; ++j) {
                p *= q_[i];
                x_star_[part_.begin(i) + j] = p;
            }
        }
        double L_max = L_list.front();
        for (const double Li : L_list) L_max = std::max(L_max, Li);
        params_ = build_params(sigma, std::move(L_list), L_max);
        f_star_ = value(x_star_);
    }

    std::size_t dim() const override { return part_.dim(); }
    const BlockPartition& partition() const override { return part_; }
    const ProblemParams& params() const override { return params_; }

    double value(std::span<const double> point) const override {
        double f = 0;
        for (std::size_t i = 0; i < part_.n_blocks(); ++i) {
            const std::size_t b0 = part_.begin(i);
            const double scale = (params_.L_blocks[i] - params_.sigma) / 4.0;
            double quad = 0, nrm2 = 0;
            for (std::size_t j = 0; j < block_size_; ++j) {
                const double xj = point[b0 + j];
                quad += xj * tridiag_row(point, i, j);
                nrm2 += xj * xj;
            }
            f += scale * (0.5 * quad - point[b0]) + 0.5 * params_.sigma * nrm2;
        }
        return f;
    }

    void block_gradient(std::size_t block, std::span<const double> point,
                        std::span<double> out) const override {
        const std::size_t b0 = part_.begin(block);
        const double scale = (params_.L_blocks[block] - params_.sigma) / 4.0;
        for (std::size_t j = 0; j < block_size_; ++j)
            out[j] = scale * tridiag_row(point, block, j) + params_.sigma * point[b0 + j];
        out[0] -= scale;
    }

    const std::vector<double>* minimizer() const override { return &x_star_; }
    std::optional<double> min_value() const override { return f_star_; }

    double q(std::size_t block) const { return q_[block]; }
    double theta(std::size_t block) const { return theta_[block]; }

    /// Squared distance to x* restricted to one block (the quantity the lower
    /// bound controls).
    double block_sq_distance(std::span<const double> point, std::size_t block) const {
        double d2 = 0;
        for (std::size_t j = part_.begin(block); j < part_.end(block); ++j) {
            const double d = point[j] - x_star_[j];
            d2 += d * d;
        }
        return d2;
    }

    /// Starting iterate used by the lower-bound experiment: equal to x* on
    /// every block except `zero_block`, which starts at the origin.
    std::vector<double> adversarial_start(std::size_t zero_block) const {
        std::vector<double> x0 = x_star_;
        for (std::size_t j = part_.begin(zero_block); j < part_.end(zero_block); ++j) x0[j] = 0.0;
        return x0;
    }

private:
    double tridiag_row(std::span<const double> point, std::size_t block, std::size_t j) const {
        const std::size_t b0 = part_.begin(block);
        const double diag = (j + 1 == block_size_) ? theta_[block] : 2.0;
        double r = diag * point[b0 + j];
        if (j > 0) r -= point[b0 + j - 1];
        if (j + 1 < block_size_) r -= point[b0 + j + 1];
        return r;
    }

    BlockPartition part_;
    std::size_t block_size_;
    ProblemParams params_;
    std::vector<double> q_, theta_, x_star_;
    double f_star_ = 0;
};

/// Per-block lower-bound ratios for k iterations at sampling probabilities p:
///   ((1 - (1 - q_i^2) p_i)^k - q_i^{2b}) / (1 - q_i^{2b})
/// plus the closed-form aggregate 1/2 (1 - 4/(sum_j sqrt(kappa_j) + 2n))^k
/// valid at the bound-optimal p.
struct LowerBoundResult {
    std::vector<double> per_block;
    double max_bound = 0;
    double closed_form = 0;
};

inline double lower_bound_q(double kappa) {
    const double rk = std::sqrt(kappa);
    return (rk - 1.0) / (rk + 1.0);
}

/// The p minimizing the bound: p_i proportional to (1 - q_i^2)^{-1}.
inline std::vector<double> lower_bound_optimal_p(const std::vector<double>& kappa_list) {
    std::vector<double> p(kappa_list.size());
    double total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double q = lower_bound_q(kappa_list[i]);
        p[i] = 1.0 / (1.0 - q * q);
        total += p[i];
    }
    for (double& x : p) x /= total;
    return p;
}

inline LowerBoundResult lower_bound_ratio(const std::vector<double>& kappa_list,
                                          const std::vector<double>& p_list, std::uint64_t k,
                                          std::size_t b) {
    if (kappa_list.size() != p_list.size())
        throw std::invalid_argument("kappa and p lists must have equal length");
    double psum = 0;
    for (const double p : p_list) psum += p;
    if (std::abs(psum - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to 1");

    LowerBoundResult res;
    res.per_block.resize(kappa_list.size());
    double sum_rk = 0;
    for (std::size_t i = 0; i < kappa_list.size(); ++i) {
        const double q = lower_bound_q(kappa_list[i]);
        const double q2b = std::pow(q, 2.0 * static_cast<double>(b));
        const double contraction = std::pow(1.0 - (1.0 - q * q) * p_list[i], static_cast<double>(k));
        res.per_block[i] = (contraction - q2b) / (1.0 - q2b);
        res.max_bound = std::max(res.max_bound, res.per_block[i]);
        sum_rk += std::sqrt(kappa_list[i]);
    }
    const double n = static_cast<double>(kappa_list.size());
    res.closed_form = 0.5 * std::pow(1.0 - 4.0 / (sum_rk + 2.0 * n), static_cast<double>(k));
    return res;
}

}  // namespace a2bcd

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "a2bcd/oracle.hpp"
#include "a2bcd/rng.hpp"

namespace a2bcd {

/// Controlled test problem: block-diagonal positive-definite quadratic
/// f(x) = 1/2 (x - x*)' H (x - x*) with prescribed per-block spectra, random
/// within-block rotations, and closed-form minimizer (f* = 0).
///
/// With the single-argument kappa form every block gets eigenvalues
/// log-spaced over [1, kappa], so sigma = 1 and L_i = kappa exactly (equal
/// L_i). Passing an explicit L_list instead spreads block i over [1, L_i].
/// Single-coordinate blocks degenerate to one eigenvalue: block 0 carries 1,
/// the rest carry their L_i.
class SynthQuadratic final : public ProblemOracle {
public:
    SynthQuadratic(std::size_t n_blocks, std::size_t block_size, std::vector<double> L_list,
                   std::uint64_t seed)
        : part_(BlockPartition::uniform(n_blocks * block_size, block_size)) {
        if (L_list.size() != n_blocks) throw std::invalid_argument("need one L per block");
        for (const double L : L_list)
            if (!(L >= 1.0)) throw std::invalid_argument("block constants must be >= 1 (sigma = 1 scale)");
        const std::size_t d = part_.dim();
        auto rng = make_rng(seed);
        x_star_.resize(d);
        for (double& t : x_star_) t = 2.0 * uniform01(rng) - 1.0;

        hessians_.resize(n_blocks);
        double sigma = L_list[0];
        for (std::size_t i = 0; i < n_blocks; ++i) {
            const std::size_t b = part_.size(i);
            std::vector<double> eig(b);
            if (b == 1) {
                eig[0] = (i == 0) ? 1.0 : L_list[i];
            } else {
                for (std::size_t j = 0; j < b; ++j)
                    eig[j] = std::pow(L_list[i], static_cast<double>(j) / static_cast<double>(b - 1));
            }
            for (const double e : eig) sigma = std::min(sigma, e);
            hessians_[i] = rotated_spd(eig, rng);
        }
        double L_max = 1;
        for (const double L : L_list) L_max = std::max(L_max, L);
        params_ = build_params(sigma, std::move(L_list), L_max);
    }

    SynthQuadratic(std::size_t n_blocks, std::size_t block_size, double kappa, std::uint64_t seed)
        : SynthQuadratic(n_blocks, block_size, std::vector<double>(n_blocks, kappa), seed) {
        if (!(kappa >= 1.0)) throw std::invalid_argument("kappa must be >= 1");
    }

    std::size_t dim() const override { return part_.dim(); }
    const BlockPartition& partition() const override { return part_; }
    const ProblemParams& params() const override { return params_; }

    double value(std::span<const double> point) const override {
        double f = 0;
        for (std::size_t i = 0; i < part_.n_blocks(); ++i) {
            const std::size_t b0 = part_.begin(i), b = part_.size(i);
            const auto& H = hessians_[i];
            for (std::size_t r = 0; r < b; ++r) {
                double hrow = 0;
                for (std::size_t c = 0; c < b; ++c)
                    hrow += H[r * b + c] * (point[b0 + c] - x_star_[b0 + c]);
                f += 0.5 * (point[b0 + r] - x_star_[b0 + r]) * hrow;
            }
        }
        return f;
    }

    void block_gradient(std::size_t block, std::span<const double> point,
                        std::span<double> out) const override {
        const std::size_t b0 = part_.begin(block), b = part_.size(block);
        const auto& H = hessians_[block];
        for (std::size_t r = 0; r < b; ++r) {
            double g = 0;
            for (std::size_t c = 0; c < b; ++c)
                g += H[r * b + c] * (point[b0 + c] - x_star_[b0 + c]);
            out[r] = g;
        }
    }

    const std::vector<double>* minimizer() const override { return &x_star_; }
    std::optional<double> min_value() const override { return 0.0; }

    /// Row-major dense Hessian of one block (tests eigensolve these).
    const std::vector<double>& block_hessian(std::size_t block) const { return hessians_[block]; }

private:
    // Q diag(eig) Q' for a random orthogonal Q (Gram-Schmidt on a Gaussian).
    static std::vector<double> rotated_spd(const std::vector<double>& eig, std::mt19937_64& rng) {
        const std::size_t b = eig.size();
        std::vector<double> Q(b * b);
        for (double& v : Q) v = normal01(rng);
        for (std::size_t c = 0; c < b; ++c) {
            for (int pass = 0; pass < 2; ++pass)
                for (std::size_t p = 0; p < c; ++p) {
                    double dot = 0;
                    for (std::size_t r = 0; r < b; ++r) dot += Q[r * b + c] * Q[r * b + p];
                    for (std::size_t r = 0; r < b; ++r) Q[r * b + c] -= dot * Q[r * b + p];
                }
            double nrm = 0;
            for (std::size_t r = 0; r < b; ++r) nrm += Q[r * b + c] * Q[r * b + c];
            nrm = std::sqrt(nrm);
            for (std::size_t r = 0; r < b; ++r) Q[r * b + c] /= nrm;
        }
        std::vector<double> H(b * b, 0.0);
        for (std::size_t r = 0; r < b; ++r)
            for (std::size_t c = 0; c <= r; ++c) {
                double h = 0;
                for (std::size_t j = 0; j < b; ++j) h += Q[r * b + j] * eig[j] * Q[c * b + j];
                H[r * b + c] = h;
                H[c * b + r] = h;
            }
        return H;
    }

    BlockPartition part_;
    ProblemParams params_;
    std::vector<double> x_star_;
    std::vector<std::vector<double>> hessians_;
};

}  // namespace a2bcd

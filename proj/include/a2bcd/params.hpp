#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace a2bcd {

/// Smoothness/convexity constants of a block-structured problem. Every
/// coefficient formula downstream reads from this record; values are fixed at
/// construction.
///
/// sigma may be an underestimate of the true strong-convexity modulus and
/// L / L_blocks overestimates of the true Lipschitz constants; the formulas
/// stay valid, only more conservative.
struct ProblemParams {
    double sigma = 0;               ///< strong-convexity modulus (> 0)
    double L = 0;                   ///< global gradient Lipschitz constant
    std::vector<double> L_blocks;   ///< per-block Lipschitz constants L_i
    double S = 0;                   ///< sum_i sqrt(L_i)
    double L_min = 0;               ///< min_i L_i
    double kappa = 0;               ///< L / sigma

    std::size_t n_blocks() const { return L_blocks.size(); }
};

inline ProblemParams build_params(double sigma, std::vector<double> L_blocks, double L) {
    if (!(sigma > 0)) throw std::invalid_argument("sigma must be positive");
    if (!(L > 0)) throw std::invalid_argument("L must be positive");
    if (L_blocks.empty()) throw std::invalid_argument("need at least one block constant");
    if (sigma > L) throw std::invalid_argument("sigma must not exceed L");
    ProblemParams p;
    p.sigma = sigma;
    p.L = L;
    p.S = 0;
    p.L_min = L_blocks.front();
    for (const double Li : L_blocks) {
        if (!(Li > 0)) throw std::invalid_argument("block Lipschitz constants must be positive");
        if (sigma > Li) throw std::invalid_argument("sigma must not exceed any block constant");
        p.S += std::sqrt(Li);
        if (Li < p.L_min) p.L_min = Li;
    }
    p.L_blocks = std::move(L_blocks);
    p.kappa = L / sigma;
    return p;
}

}  // namespace a2bcd

#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "a2bcd/oracle.hpp"
#include "a2bcd/rng.hpp"
#include "a2bcd/sparse_matrix.hpp"

namespace a2bcd {

/// Dual of ridge regression over the sample weights a (one per column of the
/// design matrix A, d features x n samples):
///
///   D(a) = 1/(2 d^2 lambda) |A a|^2 + 1/(2d) |a + l|^2
///
/// Hessian = A'A/(d^2 lambda) + I/d, so sigma = 1/d is always a valid
/// strong-convexity modulus (the PSD A'A part is ignored, a deliberate
/// underestimate), and L_i = |A_i|_2^2/(d^2 lambda) + 1/d with |A_i|_2 the
/// spectral norm of the column block, by power iteration.
///
/// The gradient is affine, grad_i D(a) = (1/(d^2 lambda)) A_i' (A a)
/// + (1/d)(a_(i) + l_(i)), which the parallel runtime exploits to maintain
/// A*p / A*q products instead of recomputing A a per step.
class RidgeDualOracle final : public ProblemOracle, public AffineGradientStructure {
public:
    RidgeDualOracle(SparseColumnMatrix A, std::vector<double> labels, double lambda,
                    std::size_t block_size)
        : A_(std::move(A)), labels_(std::move(labels)), lambda_(lambda),
          part_(BlockPartition::uniform(A_.cols(), block_size)) {
        if (!(lambda_ > 0)) throw std::invalid_argument("lambda must be positive");
        if (labels_.size() != A_.cols())
            throw std::invalid_argument("label count must match sample count");
        if (A_.rows() == 0) throw std::invalid_argument("need at least one feature row");

        const double d = static_cast<double>(A_.rows());
        cq_ = 1.0 / (d * d * lambda_);
        ci_ = 1.0 / d;
        linear_.resize(labels_.size());
        for (std::size_t t = 0; t < labels_.size(); ++t) linear_[t] = labels_[t] * ci_;

        std::vector<double> L(part_.n_blocks());
        double L_all_max = 0;
        for (std::size_t i = 0; i < part_.n_blocks(); ++i) {
            const double nrm = A_.block_spectral_norm(part_, i);
            L[i] = nrm * nrm * cq_ + ci_;
            L_all_max = std::max(L_all_max, L[i]);
        }
        const double full_nrm = full_spectral_norm();
        const double L_global = std::max(full_nrm * full_nrm * cq_ + ci_, L_all_max);
        params_ = build_params(ci_, std::move(L), L_global);

        if (A_.nnz() == 0) {  // pure proximal case: minimizer is -l, D = 0
            minimizer_ = std::make_unique<std::vector<double>>(labels_.size());
            for (std::size_t t = 0; t < labels_.size(); ++t) (*minimizer_)[t] = -labels_[t];
        }
    }

    std::size_t dim() const override { return A_.cols(); }
    const BlockPartition& partition() const override { return part_; }
    const ProblemParams& params() const override { return params_; }

    double value(std::span<const double> point) const override {
        std::vector<double> u(A_.rows(), 0.0);
        A_.add_product(point, 1.0, u);
        double quad = 0;
        for (const double x : u) quad += x * x;
        double prox = 0;
        for (std::size_t t = 0; t < point.size(); ++t) {
            const double r = point[t] + labels_[t];
            prox += r * r;
        }
        return 0.5 * cq_ * quad + 0.5 * ci_ * prox;
    }

    void block_gradient(std::size_t block, std::span<const double> point,
                        std::span<double> out) const override {
        std::vector<double> u(A_.rows(), 0.0);
        A_.add_product(point, 1.0, u);
        const std::size_t b0 = part_.begin(block);
        for (std::size_t j = 0; j < part_.size(block); ++j)
            out[j] = ci_ * (point[b0 + j] + labels_[b0 + j]);
        A_.add_block_transpose_product(part_, block, u, cq_, out);
    }

    const std::vector<double>* minimizer() const override { return minimizer_.get(); }
    std::optional<double> min_value() const override {
        if (minimizer_) return 0.0;
        return std::nullopt;
    }

    // AffineGradientStructure
    const SparseColumnMatrix& design_matrix() const override { return A_; }
    double coef_quadratic() const override { return cq_; }
    double coef_identity() const override { return ci_; }
    std::span<const double> linear_term() const override { return linear_; }

    double lambda() const { return lambda_; }
    const std::vector<double>& labels() const { return labels_; }

private:
    double full_spectral_norm() const {
        // power iteration on A'A over all columns
        std::vector<double> v(A_.cols(), 1.0 / std::sqrt(static_cast<double>(A_.cols())));
        std::vector<double> u(A_.rows());
        double lam = 0;
        for (int it = 0; it < 10000; ++it) {
            std::fill(u.begin(), u.end(), 0.0);
            A_.add_product(v, 1.0, u);
            std::vector<double> w(A_.cols(), 0.0);
            for (std::size_t c = 0; c < A_.cols(); ++c) {
                double acc = 0;
                for (std::size_t t = A_.col_begin(c); t < A_.col_end(c); ++t)
                    acc += A_.value(t) * u[A_.row_index(t)];
                w[c] = acc;
            }
            double nrm = 0;
            for (const double x : w) nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm == 0.0) return 0.0;
            for (std::size_t c = 0; c < A_.cols(); ++c) v[c] = w[c] / nrm;
            if (it > 0 && std::abs(nrm - lam) <= 1e-6 * nrm) {
                lam = nrm;
                break;
            }
            lam = nrm;
        }
        return std::sqrt(lam);
    }

    SparseColumnMatrix A_;
    std::vector<double> labels_;
    double lambda_;
    BlockPartition part_;
    ProblemParams params_;
    double cq_ = 0, ci_ = 0;
    std::vector<double> linear_;
    std::unique_ptr<std::vector<double>> minimizer_;
};

/// Random sparse design matrix + labels at a given density; the standing test
/// dataset when no LIBSVM file is supplied.
inline SparseColumnMatrix make_synthetic_design(std::size_t features, std::size_t samples,
                                                double density, std::uint64_t seed) {
    if (!(density > 0 && density <= 1)) throw std::invalid_argument("density must be in (0, 1]");
    SparseColumnBuilder builder(features);
    auto rng = make_rng(seed);
    for (std::size_t c = 0; c < samples; ++c) {
        builder.start_column();
        bool any = false;
        for (std::size_t r = 0; r < features; ++r) {
            if (uniform01(rng) < density) {
                builder.push(r, normal01(rng));
                any = true;
            }
        }
        if (!any) builder.push(uniform_index(rng, features), normal01(rng));
    }
    builder.set_rows(features);
    return builder.finish();
}

inline std::vector<double> make_synthetic_labels(std::size_t samples, std::uint64_t seed) {
    std::vector<double> l(samples);
    auto rng = make_rng(seed);
    for (double& v : l) v = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    return l;
}

}  // namespace a2bcd

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "a2bcd/block_partition.hpp"
#include "a2bcd/errors.hpp"

namespace a2bcd {

/// Compressed-sparse-column matrix (rows x cols). Column blocks are what the
/// solvers address, so CSC keeps block access contiguous.
class SparseColumnMatrix {
public:
    SparseColumnMatrix() = default;

    SparseColumnMatrix(std::size_t rows, std::size_t cols,
                       std::vector<std::size_t> col_ptr,
                       std::vector<std::size_t> row_idx,
                       std::vector<double> values)
        : rows_(rows), cols_(cols),
          col_ptr_(std::move(col_ptr)), row_idx_(std::move(row_idx)), values_(std::move(values)) {
        if (col_ptr_.size() != cols_ + 1 || col_ptr_.front() != 0 ||
            col_ptr_.back() != values_.size() || row_idx_.size() != values_.size())
            throw std::invalid_argument("inconsistent CSC arrays");
        for (std::size_t c = 0; c < cols_; ++c) {
            if (col_ptr_[c + 1] < col_ptr_[c]) throw std::invalid_argument("column pointers must be monotone");
            for (std::size_t t = col_ptr_[c]; t < col_ptr_[c + 1]; ++t)
                if (row_idx_[t] >= rows_) throw std::invalid_argument("row index out of range");
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }

    std::size_t col_begin(std::size_t c) const { return col_ptr_[c]; }
    std::size_t col_end(std::size_t c) const { return col_ptr_[c + 1]; }
    std::size_t row_index(std::size_t t) const { return row_idx_[t]; }
    double value(std::size_t t) const { return values_[t]; }

    /// out += scale * A * x   (x over all columns)
    void add_product(std::span<const double> x, double scale, std::span<double> out) const {
        for (std::size_t c = 0; c < cols_; ++c) {
            const double xc = scale * x[c];
            if (xc == 0.0) continue;
            for (std::size_t t = col_ptr_[c]; t < col_ptr_[c + 1]; ++t)
                out[row_idx_[t]] += values_[t] * xc;
        }
    }

    /// out += scale * A_block * xb, where xb spans the block's columns.
    void add_block_product(const BlockPartition& part, std::size_t block,
                           std::span<const double> xb, double scale, std::span<double> out) const {
        const std::size_t b0 = part.begin(block);
        for (std::size_t c = b0; c < part.end(block); ++c) {
            const double xc = scale * xb[c - b0];
            for (std::size_t t = col_ptr_[c]; t < col_ptr_[c + 1]; ++t)
                out[row_idx_[t]] += values_[t] * xc;
        }
    }

    /// out += scale * A_block^T * u, u an m-vector; out spans the block.
    void add_block_transpose_product(const BlockPartition& part, std::size_t block,
                                     std::span<const double> u, double scale, std::span<double> out) const {
        const std::size_t b0 = part.begin(block);
        for (std::size_t c = b0; c < part.end(block); ++c) {
            double acc = 0;
            for (std::size_t t = col_ptr_[c]; t < col_ptr_[c + 1]; ++t)
                acc += values_[t] * u[row_idx_[t]];
            out[c - b0] += scale * acc;
        }
    }

    /// Largest singular value of the column block, by power iteration on
    /// A_b^T A_b with a deterministic start vector. Relative tolerance 1e-6,
    /// hard cap 1e4 iterations.
    double block_spectral_norm(const BlockPartition& part, std::size_t block) const {
        const std::size_t w = part.size(block);
        std::vector<double> v(w, 1.0 / std::sqrt(static_cast<double>(w)));
        std::vector<double> u(rows_), w2(w);
        double lambda = 0;
        for (int it = 0; it < 10000; ++it) {
            std::fill(u.begin(), u.end(), 0.0);
            add_block_product(part, block, v, 1.0, u);
            std::fill(w2.begin(), w2.end(), 0.0);
            add_block_transpose_product(part, block, u, 1.0, w2);
            double nrm = 0;
            for (const double x : w2) nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm == 0.0) return 0.0;  // zero block
            const double lambda_new = nrm;  // |A^T A v| with |v| = 1
            for (std::size_t j = 0; j < w; ++j) v[j] = w2[j] / nrm;
            if (it > 0 && std::abs(lambda_new - lambda) <= 1e-6 * lambda_new) {
                lambda = lambda_new;
                break;
            }
            lambda = lambda_new;
        }
        return std::sqrt(lambda);
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::size_t> col_ptr_{0};
    std::vector<std::size_t> row_idx_;
    std::vector<double> values_;
};

/// Builder used by the parser and the synthetic-data generator: appends whole
/// columns in order, dropping explicit zeros.
class SparseColumnBuilder {
public:
    explicit SparseColumnBuilder(std::size_t rows = 0) : rows_(rows) {}

    void start_column() { col_ptr_.push_back(row_idx_.size()); }

    void push(std::size_t row, double value) {
        if (value == 0.0) return;
        row_idx_.push_back(row);
        values_.push_back(value);
        if (row >= rows_) rows_ = row + 1;
    }

    void set_rows(std::size_t rows) { rows_ = rows; }
    std::size_t rows() const { return rows_; }

    SparseColumnMatrix finish() {
        col_ptr_.push_back(row_idx_.size());
        const std::size_t cols = col_ptr_.size() - 1;
        return SparseColumnMatrix(rows_, cols, std::move(col_ptr_), std::move(row_idx_), std::move(values_));
    }

private:
    std::size_t rows_;
    std::vector<std::size_t> col_ptr_;
    std::vector<std::size_t> row_idx_;
    std::vector<double> values_;
};

}  // namespace a2bcd

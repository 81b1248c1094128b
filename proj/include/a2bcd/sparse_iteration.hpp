#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>

#include "a2bcd/errors.hpp"
#include "a2bcd/params.hpp"
#include "a2bcd/schedule.hpp"

namespace a2bcd {

struct Mat2 {
    double a11 = 1, a12 = 0;
    double a21 = 0, a22 = 1;

    static Mat2 identity() { return {}; }

    double det() const { return a11 * a22 - a12 * a21; }

    Mat2 inverse() const {
        const double d = det();
        if (std::abs(d) < 1e-280)
            throw NumericError("reconstruction matrix numerically singular; restart overdue");
        return {a22 / d, -a12 / d, -a21 / d, a11 / d};
    }

    Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
};

/// Per-step transition of the (y, v) pair. Eigenvalues are 1 and
/// beta(1-alpha), so det(B) after k steps is beta(1-alpha)^k and the inverse
/// grows accordingly until a restart resets B to the identity.
inline Mat2 iteration_matrix(const Schedule& s) {
    return {1.0 - s.alpha * s.beta, s.alpha * s.beta,
            1.0 - s.beta, s.beta};
}

/// Closed-form inverse of the step matrix. The shared inverse is maintained
/// incrementally as b <- b * this (each factor is well conditioned), never by
/// inverting the accumulated B, whose determinant underflows into roundoff
/// noise long before the entries do.
inline Mat2 iteration_matrix_inverse(const Schedule& s) {
    const double det = s.beta * (1.0 - s.alpha);
    return {s.beta / det, -s.alpha * s.beta / det,
            -(1.0 - s.beta) / det, (1.0 - s.alpha * s.beta) / det};
}

/// Magnitudes of the block update in (y, v) coordinates:
///   D1 = alpha / sqrt(sigma L_i) + h (1 - alpha) / L_i   (y row)
///   D2 = 1 / sqrt(sigma L_i)                             (v row)
struct UpdateCoeffs {
    double D1, D2;
};

inline UpdateCoeffs update_coeffs(const Schedule& s, const ProblemParams& p, std::size_t block) {
    const double Li = p.L_blocks[block];
    return {s.alpha / std::sqrt(p.sigma * Li) + s.h * (1.0 - s.alpha) / Li,
            1.0 / std::sqrt(p.sigma * Li)};
}

/// (y, v) = B (p, q), elementwise over the vectors.
inline void recover_yv(const Mat2& B, std::span<const double> p, std::span<const double> q,
                       std::span<double> y, std::span<double> v) {
    if (std::abs(B.det()) < 1e-280)
        throw NumericError("reconstruction matrix numerically singular; restart overdue");
    for (std::size_t t = 0; t < p.size(); ++t) {
        y[t] = B.a11 * p[t] + B.a12 * q[t];
        v[t] = B.a21 * p[t] + B.a22 * q[t];
    }
}

/// min(1000, largest R with beta(1-alpha)^{-R} < 1e8). The binding constraint
/// is precision, not overflow: p and q carry components of size
/// beta(1-alpha)^{-k} that cancel in y = B (p, q), so letting the growth pass
/// ~1e8 erodes the reconstruction below ~1e-8 relative accuracy. (The 1e280
/// overflow bound is looser for every reachable schedule.)
inline std::uint64_t default_restart_period(const Schedule& s) {
    const double contraction = s.beta * (1.0 - s.alpha);
    const double decay = -std::log(contraction);
    if (!(decay > 0)) return 1000;
    const double cap = 8.0 * std::log(10.0) / decay;
    if (cap >= 1000.0) return 1000;
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(cap));
}

}  // namespace a2bcd

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "a2bcd/params.hpp"

namespace a2bcd {

enum class ScheduleVariant { main, extension };

/// Iteration coefficients plus the Lyapunov constants that diagnose a run.
/// Immutable after construction; shared freely across threads.
///
/// theory_valid records whether psi sits inside the proven window
/// (psi <= 3/7 for the main variant). Runs outside the window are allowed by
/// default because asynchronous iterations are empirically much more delay-
/// tolerant than the worst-case analysis; strict mode turns the flag into an
/// error at construction.
struct Schedule {
    double psi = 0;
    double alpha = 0;
    double beta = 0;
    double h = 1;
    std::size_t tau = 0;
    double c_lyap = 0;                 ///< 2 sigma^{-1/2} S^{-1} (beta/alpha (1-alpha) + 1)
    std::vector<double> c_weights;     ///< c_1..c_tau (empty when tau == 0)
    ScheduleVariant variant = ScheduleVariant::main;
    bool theory_valid = true;
};

constexpr double kTheoryPsiWindow = 3.0 / 7.0;

/// psi = 9 S^{-1/2} Lmin^{-1/2} L^{3/4} kappa^{1/4} * tau. Zero iff tau == 0.
inline double asynchronicity_parameter(const ProblemParams& p, std::size_t tau) {
    return 9.0 * std::pow(p.S, -0.5) * std::pow(p.L_min, -0.5) * std::pow(p.L, 0.75) *
           std::pow(p.kappa, 0.25) * static_cast<double>(tau);
}

/// Largest (real-valued) tau keeping psi <= 3/7; floor() gives the integer cap.
inline double theory_max_tau(const ProblemParams& p) {
    return (1.0 / 21.0) * std::sqrt(p.S) * std::sqrt(p.L_min) * std::pow(p.L, -0.75) *
           std::pow(p.kappa, -0.25);
}

struct MainCoefficients {
    double alpha, beta, h;
};

inline MainCoefficients main_coefficients(const ProblemParams& p, double psi) {
    const double root_sigma = std::sqrt(p.sigma);
    MainCoefficients c;
    c.alpha = 1.0 / (1.0 + (1.0 + psi) * p.S / root_sigma);
    c.beta = 1.0 - (1.0 - psi) * root_sigma / p.S;
    c.h = 1.0 - 0.5 * root_sigma / std::sqrt(p.L_min) * psi;
    return c;
}

/// Equal-L_i alternative with no hard window on psi:
/// psi = 6 kappa^{1/2} n^{-1} tau, beta = 1 - (1+psi)^{-1} sigma^{1/2}/S,
/// h = (1 + psi sigma^{1/2} / (2 L^{1/2}))^{-1}.
inline MainCoefficients extension_coefficients(const ProblemParams& p, double psi) {
    const double root_sigma = std::sqrt(p.sigma);
    MainCoefficients c;
    c.alpha = 1.0 / (1.0 + (1.0 + psi) * p.S / root_sigma);
    c.beta = 1.0 - root_sigma / ((1.0 + psi) * p.S);
    c.h = 1.0 / (1.0 + 0.5 * root_sigma / std::sqrt(p.L) * psi);
    return c;
}

inline double extension_psi(const ProblemParams& p, std::size_t tau) {
    return 6.0 * std::sqrt(p.kappa) / static_cast<double>(p.n_blocks()) * static_cast<double>(tau);
}

inline double lyapunov_constant(const ProblemParams& p, double alpha, double beta) {
    return 2.0 / (std::sqrt(p.sigma) * p.S) * (beta / alpha * (1.0 - alpha) + 1.0);
}

/// r and the flat level s of the weight recurrence c_{i+1} = r c_i - s.
struct AuxWeights {
    double r;  ///< 1 - sigma^{1/2}/S
    double s;  ///< 6 S^{-1} L^{1/2} kappa^{3/2} psi^{-1} tau
};

inline AuxWeights aux_weights(const ProblemParams& p, double psi, std::size_t tau) {
    AuxWeights w;
    w.r = 1.0 - std::sqrt(p.sigma) / p.S;
    w.s = 6.0 / p.S * std::sqrt(p.L) * std::pow(p.kappa, 1.5) / psi * static_cast<double>(tau);
    return w;
}

/// Asynchronicity-error weights c_1..c_tau, computed by the backward
/// recurrence c_i = (c_{i+1} + s) / r with c_{tau+1} = 0. Equivalent to the
/// explicit double sum but numerically stable.
inline std::vector<double> async_weights(const ProblemParams& p, double psi, std::size_t tau) {
    if (tau == 0) return {};
    if (!(psi > 0)) throw std::invalid_argument("async weights need psi > 0 when tau >= 1");
    const AuxWeights w = aux_weights(p, psi, tau);
    std::vector<double> c(tau);
    double next = 0.0;  // c_{tau+1}
    for (std::size_t i = tau; i-- > 0;) {
        c[i] = (next + w.s) / w.r;
        next = c[i];
    }
    return c;
}

namespace detail {
inline Schedule finish_schedule(const ProblemParams& p, double psi, std::size_t tau,
                                const MainCoefficients& co, ScheduleVariant variant, bool strict) {
    Schedule s;
    s.psi = psi;
    s.alpha = co.alpha;
    s.beta = co.beta;
    s.h = co.h;
    s.tau = tau;
    s.variant = variant;
    s.theory_valid = variant == ScheduleVariant::extension || psi <= kTheoryPsiWindow;
    if (strict && !s.theory_valid)
        throw std::invalid_argument("psi exceeds the 3/7 theory window (strict mode)");
    s.c_lyap = lyapunov_constant(p, co.alpha, co.beta);
    s.c_weights = tau ? async_weights(p, psi, tau) : std::vector<double>{};
    return s;
}
}  // namespace detail

/// Main schedule from a delay bound; psi derived from tau.
inline Schedule make_schedule(const ProblemParams& p, std::size_t tau, bool strict = false) {
    const double psi = asynchronicity_parameter(p, tau);
    return detail::finish_schedule(p, psi, tau, main_coefficients(p, psi), ScheduleVariant::main, strict);
}

/// Main schedule with psi pinned directly (empirical tuning); tau still sizes
/// the history window and the c-weights.
inline Schedule make_schedule_psi(const ProblemParams& p, double psi, std::size_t tau,
                                  bool strict = false) {
    if (psi < 0) throw std::invalid_argument("psi must be nonnegative");
    if (tau == 0 && psi != 0) throw std::invalid_argument("tau = 0 forces psi = 0");
    if (tau > 0 && psi == 0) throw std::invalid_argument("tau >= 1 needs psi > 0");
    return detail::finish_schedule(p, psi, tau, main_coefficients(p, psi), ScheduleVariant::main, strict);
}

/// Extension-variant schedule; requires all L_i equal.
inline Schedule make_extension_schedule(const ProblemParams& p, std::size_t tau) {
    for (const double Li : p.L_blocks)
        if (Li != p.L_blocks.front())
            throw std::invalid_argument("extension schedule requires equal block constants");
    const double psi = extension_psi(p, tau);
    return detail::finish_schedule(p, psi, tau, extension_coefficients(p, psi),
                                   ScheduleVariant::extension, false);
}

}  // namespace a2bcd

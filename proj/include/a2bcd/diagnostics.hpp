#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "a2bcd/errors.hpp"
#include "a2bcd/history.hpp"
#include "a2bcd/rng.hpp"
#include "a2bcd/schedule.hpp"
#include "a2bcd/trace.hpp"

namespace a2bcd {

/// Evaluates the Lyapunov function
///   rho_k = |v_k - x*|^2 + sum_j c_j |y_{k+1-j} - y_{k-j}|^2 + c (f(x_k) - f*)
/// against a schedule's constants. Requires the minimizer; callers without one
/// fall back to plain f-gaps.
class LyapunovMeter {
public:
    LyapunovMeter(const Schedule& schedule, std::vector<double> x_star, double f_star)
        : schedule_(&schedule), x_star_(std::move(x_star)), f_star_(f_star) {}

    /// Asynchronicity error A_k from the y-history window. Zero when tau == 0
    /// or the window is constant.
    double async_error(const YHistory& hist, std::uint64_t k) const {
        double a = 0;
        for (std::size_t j = 1; j <= schedule_->tau; ++j) {
            const auto& ya = hist.at(static_cast<std::int64_t>(k) + 1 - static_cast<std::int64_t>(j));
            const auto& yb = hist.at(static_cast<std::int64_t>(k) - static_cast<std::int64_t>(j));
            double d2 = 0;
            for (std::size_t t = 0; t < ya.size(); ++t) {
                const double d = ya[t] - yb[t];
                d2 += d * d;
            }
            a += schedule_->c_weights[j - 1] * d2;
        }
        return a;
    }

    double rho(std::span<const double> v, double f_x, const YHistory& hist, std::uint64_t k) const {
        if (hist.latest() < k) throw std::invalid_argument("history not populated up to k");
        double vdist = 0;
        for (std::size_t t = 0; t < v.size(); ++t) {
            const double d = v[t] - x_star_[t];
            vdist += d * d;
        }
        return vdist + async_error(hist, k) + schedule_->c_lyap * (f_x - f_star_);
    }

    double f_star() const { return f_star_; }
    const std::vector<double>& x_star() const { return x_star_; }

private:
    const Schedule* schedule_;
    std::vector<double> x_star_;
    double f_star_;
};

enum class TraceMetric { f_x_gap, f_y_gap, rho };

inline double metric_of(const TraceRow& r, TraceMetric m) {
    switch (m) {
        case TraceMetric::f_x_gap: return r.f_x_gap;
        case TraceMetric::f_y_gap: return r.f_y_gap;
        case TraceMetric::rho:
            if (!r.has_rho) throw std::invalid_argument("trace has no rho column");
            return r.rho;
    }
    return 0;
}

/// Least-squares fit of ln(metric) against iteration number; the implied
/// complexity K(eps) = ln(1/eps) / (-slope).
struct RateFit {
    double slope = 0;
    double intercept = 0;
    double residual_rms = 0;
    std::size_t points = 0;
    bool flat = false;  ///< slope >= 0: no decay, K(eps) reported as infinity

    double complexity(double eps) const {
        if (flat || slope >= 0) return std::numeric_limits<double>::infinity();
        return std::log(1.0 / eps) / (-slope);
    }
};

inline RateFit fit_rate(const Trace& trace, TraceMetric metric, std::size_t first_row = 0,
                        std::size_t last_row = static_cast<std::size_t>(-1)) {
    last_row = std::min(last_row, trace.rows.size());
    if (last_row < first_row || last_row - first_row < 50)
        throw std::invalid_argument("rate fit needs a window of at least 50 checkpoints");
    double sk = 0, sv = 0, skk = 0, skv = 0;
    const double n = static_cast<double>(last_row - first_row);
    for (std::size_t i = first_row; i < last_row; ++i) {
        const double m = metric_of(trace.rows[i], metric);
        if (!(m > 0)) throw NumericError("rate fit requires positive metric values");
        const double k = static_cast<double>(trace.rows[i].k);
        const double lv = std::log(m);
        sk += k; sv += lv; skk += k * k; skv += k * lv;
    }
    RateFit f;
    f.points = last_row - first_row;
    const double denom = n * skk - sk * sk;
    if (denom == 0) throw std::invalid_argument("rate fit window has no k spread");
    f.slope = (n * skv - sk * sv) / denom;
    f.intercept = (sv - f.slope * sk) / n;
    double ss = 0;
    for (std::size_t i = first_row; i < last_row; ++i) {
        const double k = static_cast<double>(trace.rows[i].k);
        const double r = std::log(metric_of(trace.rows[i], metric)) - (f.intercept + f.slope * k);
        ss += r * r;
    }
    f.residual_rms = std::sqrt(ss / n);
    // slopes this close to zero are summation roundoff on a constant metric;
    // a real decay at 1e-14/iteration has no measurable complexity anyway
    f.flat = f.slope >= -1e-14;
    return f;
}

/// Paired comparison of two trace families at common target accuracies.
struct CompareRow {
    double target = 0;
    double iters_a = 0, iters_b = 0;     // mean first-crossing iteration
    double iter_ratio = 1, iter_lo = 1, iter_hi = 1;  // a/b with bootstrap CI
    double seconds_a = 0, seconds_b = 0;
    double seconds_ratio = 1;
};

struct CompareReport {
    std::vector<CompareRow> rows;
    double ci_level = 0.95;

    void to_csv(std::ostream& out) const {
        out << "target,iters_a,iters_b,iter_ratio,iter_ratio_lo,iter_ratio_hi,"
               "seconds_a,seconds_b,seconds_ratio\n";
        for (const auto& r : rows)
            out << r.target << ',' << r.iters_a << ',' << r.iters_b << ',' << r.iter_ratio << ','
                << r.iter_lo << ',' << r.iter_hi << ',' << r.seconds_a << ',' << r.seconds_b << ','
                << r.seconds_ratio << '\n';
    }

    std::string text() const {
        std::ostringstream os;
        for (const auto& r : rows) {
            os << "target " << r.target << ": iterations " << r.iters_a << " vs " << r.iters_b
               << " (ratio " << r.iter_ratio << ", CI [" << r.iter_lo << ", " << r.iter_hi << "])";
            if (r.seconds_a > 0 && r.seconds_b > 0)
                os << ", wall ratio " << r.seconds_ratio;
            os << '\n';
        }
        return os.str();
    }
};

namespace detail {
// First checkpoint reaching `target`; returns false if the trace never does.
inline bool first_crossing(const Trace& t, TraceMetric m, double target, double& k, double& sec) {
    for (const auto& r : t.rows) {
        if (metric_of(r, m) <= target) {
            k = static_cast<double>(r.k);
            sec = r.seconds;
            return true;
        }
    }
    return false;
}
}  // namespace detail

/// Targets default to five geometric levels every trace in both families
/// reaches. CI from a percentile bootstrap over the trace families.
inline CompareReport compare_traces(std::span<const Trace> a, std::span<const Trace> b,
                                    TraceMetric metric, double ci_level = 0.95,
                                    std::vector<double> targets = {}, std::uint64_t seed = 7) {
    if (a.empty() || b.empty()) throw std::invalid_argument("compare_traces needs nonempty families");
    if (targets.empty()) {
        double lo = 0, hi = std::numeric_limits<double>::infinity();
        auto scan = [&](const Trace& t) {
            double mn = std::numeric_limits<double>::infinity(), mx = 0;
            for (const auto& r : t.rows) {
                const double m = metric_of(r, metric);
                mn = std::min(mn, m);
                mx = std::max(mx, m);
            }
            lo = std::max(lo, mn);
            hi = std::min(hi, mx);
        };
        for (const auto& t : a) scan(t);
        for (const auto& t : b) scan(t);
        if (!(hi > lo) || !(lo > 0))
            throw std::invalid_argument("traces share no positive target range");
        for (int i = 1; i <= 5; ++i)
            targets.push_back(hi * std::pow(lo / hi, i / 6.0));
    }

    CompareReport rep;
    rep.ci_level = ci_level;
    auto rng = make_rng(seed);
    for (const double target : targets) {
        std::vector<double> ka, kb, sa, sb;
        double k, sec;
        for (const auto& t : a)
            if (detail::first_crossing(t, metric, target, k, sec)) { ka.push_back(k); sa.push_back(sec); }
        for (const auto& t : b)
            if (detail::first_crossing(t, metric, target, k, sec)) { kb.push_back(k); sb.push_back(sec); }
        if (ka.empty() || kb.empty()) continue;
        auto mean = [](const std::vector<double>& v) {
            double s = 0;
            for (const double x : v) s += x;
            return s / static_cast<double>(v.size());
        };
        CompareRow row;
        row.target = target;
        row.iters_a = mean(ka);
        row.iters_b = mean(kb);
        row.iter_ratio = row.iters_a / std::max(row.iters_b, 1e-300);
        row.seconds_a = mean(sa);
        row.seconds_b = mean(sb);
        row.seconds_ratio = row.seconds_b > 0 ? row.seconds_a / row.seconds_b : 0;

        const int B = 1000;
        std::vector<double> ratios;
        ratios.reserve(B);
        for (int it = 0; it < B; ++it) {
            double ma = 0, mb = 0;
            for (std::size_t i = 0; i < ka.size(); ++i) ma += ka[uniform_index(rng, ka.size())];
            for (std::size_t i = 0; i < kb.size(); ++i) mb += kb[uniform_index(rng, kb.size())];
            ma /= static_cast<double>(ka.size());
            mb /= static_cast<double>(kb.size());
            ratios.push_back(ma / std::max(mb, 1e-300));
        }
        std::sort(ratios.begin(), ratios.end());
        const double tail = (1.0 - ci_level) / 2.0;
        row.iter_lo = ratios[static_cast<std::size_t>(tail * (B - 1))];
        row.iter_hi = ratios[static_cast<std::size_t>((1.0 - tail) * (B - 1))];
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace a2bcd

#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "a2bcd/errors.hpp"

namespace a2bcd {

struct TraceRow {
    std::uint64_t k = 0;
    double seconds = 0;    ///< 0 for deterministic engines (see README)
    double f_x_gap = 0;    ///< f(x_k) - f*
    double f_y_gap = 0;    ///< f(y_k) - f*
    double rho = 0;        ///< Lyapunov value, when x*/f* are known
    bool has_rho = false;
};

/// Per-run checkpoint record. CSV schema:
///   k,seconds,f_x_gap,f_y_gap,rho
/// one row per checkpoint, 17 significant digits, rho empty when unknown.
struct Trace {
    std::vector<TraceRow> rows;
    std::uint64_t seed = 0;
    std::string config;           ///< flat key=value snapshot, informational
    double wall_seconds = 0;      ///< total run time, measured (not serialized)
    double f_star = 0;
    bool f_star_oracle_derived = false;  ///< f* from a pre-solve, not closed form

    void to_csv(std::ostream& out) const {
        out << "k,seconds,f_x_gap,f_y_gap,rho\n";
        char buf[32 * 4];
        for (const TraceRow& r : rows) {
            std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%.17g,",
                          static_cast<unsigned long long>(r.k), r.seconds, r.f_x_gap, r.f_y_gap);
            out << buf;
            if (r.has_rho) {
                std::snprintf(buf, sizeof buf, "%.17g", r.rho);
                out << buf;
            }
            out << '\n';
        }
    }

    static Trace from_csv(std::istream& in) {
        Trace t;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (lineno == 1 || line.empty()) continue;  // header
            TraceRow r;
            std::istringstream ss(line);
            std::string field;
            auto next = [&](const char* what) {
                if (!std::getline(ss, field, ','))
                    throw ParseError(std::string("missing trace field ") + what, lineno);
                return field;
            };
            r.k = std::stoull(next("k"));
            r.seconds = std::stod(next("seconds"));
            r.f_x_gap = std::stod(next("f_x_gap"));
            r.f_y_gap = std::stod(next("f_y_gap"));
            if (std::getline(ss, field, ',') && !field.empty()) {
                r.rho = std::stod(field);
                r.has_rho = true;
            }
            if (!t.rows.empty() && r.k <= t.rows.back().k)
                throw ParseError("trace iterations must be strictly increasing", lineno);
            t.rows.push_back(r);
        }
        return t;
    }
};

}  // namespace a2bcd

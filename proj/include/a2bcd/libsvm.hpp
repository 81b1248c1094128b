#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "a2bcd/errors.hpp"
#include "a2bcd/sparse_matrix.hpp"

namespace a2bcd {

/// A parsed dataset: one column per sample, features x samples.
struct LabeledDataset {
    SparseColumnMatrix features;
    std::vector<double> labels;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view tok, std::size_t line, const char* what) {
    std::string_view digits = tok;
    if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);  // "+1" labels
    double v = 0;
    const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (res.ec != std::errc{} || res.ptr != digits.data() + digits.size() || digits.empty())
        throw ParseError(std::string("invalid ") + what + " '" + std::string(tok) + "'", line);
    return v;
}

inline std::size_t parse_index(std::string_view tok, std::size_t line) {
    std::size_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw ParseError("invalid feature index '" + std::string(tok) + "'", line);
    return v;
}

}  // namespace detail

/// LIBSVM text format: `label idx:val idx:val ...` per line, indices 1-based
/// and strictly ascending. `#` starts a comment; blank lines are skipped.
/// The feature dimension is the largest index seen unless `dim_override`
/// raises it (published datasets sometimes omit trailing all-zero features).
inline LabeledDataset parse_libsvm(std::istream& in,
                                   std::optional<std::size_t> dim_override = std::nullopt) {
    SparseColumnBuilder builder;
    std::vector<double> labels;
    std::string raw;
    std::size_t lineno = 0;
    std::size_t max_index = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line(raw);
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        // label token
        const auto label_end = line.find_first_of(" \t");
        const std::string_view label_tok = line.substr(0, label_end);
        labels.push_back(detail::parse_double(label_tok, lineno, "label"));
        builder.start_column();
        line = label_end == std::string_view::npos ? std::string_view{} : detail::trim(line.substr(label_end));

        std::size_t prev_index = 0;
        while (!line.empty()) {
            const auto tok_end = line.find_first_of(" \t");
            const std::string_view tok = line.substr(0, tok_end);
            const auto colon = tok.find(':');
            if (colon == std::string_view::npos)
                throw ParseError("expected idx:value pair, got '" + std::string(tok) + "'", lineno);
            const std::size_t idx = detail::parse_index(tok.substr(0, colon), lineno);
            if (idx < 1) throw ParseError("feature indices are 1-based", lineno);
            if (idx <= prev_index) throw ParseError("non-ascending index", lineno);
            prev_index = idx;
            max_index = std::max(max_index, idx);
            const double val = detail::parse_double(tok.substr(colon + 1), lineno, "feature value");
            builder.push(idx - 1, val);
            line = tok_end == std::string_view::npos ? std::string_view{} : detail::trim(line.substr(tok_end));
        }
    }
    if (dim_override) {
        if (*dim_override < max_index)
            throw std::invalid_argument("dimension override below the largest feature index seen");
        builder.set_rows(*dim_override);
    } else {
        builder.set_rows(max_index);
    }
    return LabeledDataset{builder.finish(), std::move(labels)};
}

/// Inverse of parse_libsvm for valid data; numeric content round-trips
/// exactly (17 significant digits).
inline void serialize_libsvm(const LabeledDataset& data, std::ostream& out) {
    char buf[64];
    for (std::size_t c = 0; c < data.features.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", data.labels[c]);
        out << buf;
        for (std::size_t t = data.features.col_begin(c); t < data.features.col_end(c); ++t) {
            std::snprintf(buf, sizeof buf, " %zu:%.17g", data.features.row_index(t) + 1,
                          data.features.value(t));
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace a2bcd

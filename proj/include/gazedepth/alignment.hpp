#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazedepth/common.hpp"
#include "gazedepth/features.hpp"

namespace gazedepth {

enum class Normalize { None, ByMinLength, ByMaxLength };

inline const char* to_string(Normalize n) {
    switch (n) {
        case Normalize::None: return "none";
        case Normalize::ByMinLength: return "min";
        default: return "max";
    }
}

/// Scoring parameters for both sequence measures.
///
/// Smith-Waterman substitution maps cosine similarity s to 2s - 1, so a
/// perfect match scores +1 and orthogonal features score -1; with raw
/// non-negative cosines local alignment would degenerate. Levenshtein uses
/// substitution cost (1 - s) / 2 in [0, 1], commensurate with indel cost 1.
struct ScoringScheme {
    std::function<double(double)> substitution = [](double s) { return 2.0 * s - 1.0; };
    double gap_penalty = 0.5;
    double indel_cost = 1.0;
    Normalize normalize = Normalize::ByMaxLength;

    void validate() const {
        if (!(gap_penalty >= 0.0)) throw std::invalid_argument("gap_penalty must be >= 0");
        if (!(indel_cost > 0.0)) throw std::invalid_argument("indel_cost must be > 0");
    }
    static double levenshtein_substitution_cost(double cosine) { return (1.0 - cosine) / 2.0; }
};

struct AlignmentResult {
    double score = 0.0;
    std::size_t len_a = 0;
    std::size_t len_b = 0;
    std::optional<double> normalized;
};

namespace detail {

inline std::optional<double> normalize_score(double score, std::size_t la, std::size_t lb,
                                             Normalize mode) {
    std::size_t denom = 0;
    switch (mode) {
        case Normalize::None: return std::nullopt;
        case Normalize::ByMinLength: denom = std::min(la, lb); break;
        case Normalize::ByMaxLength: denom = std::max(la, lb); break;
    }
    if (denom == 0) return std::nullopt;
    return score / static_cast<double>(denom);
}

inline void check_dims(const std::vector<FeatureVector>& a, const std::vector<FeatureVector>& b) {
    std::size_t dim = 0;
    for (const auto& fv : a) {
        if (dim == 0) dim = fv.values.size();
        if (fv.values.size() != dim) throw std::invalid_argument("alignment: dimension mismatch in sequence");
    }
    for (const auto& fv : b) {
        if (dim == 0) dim = fv.values.size();
        if (fv.values.size() != dim) throw std::invalid_argument("alignment: dimension mismatch across sequences");
    }
}

}  // namespace detail

/// Local alignment score: H[i][j] = max(0, diag + sub(cos), up - g, left - g),
/// reported score is the matrix maximum. Empty input scores 0.
inline AlignmentResult smith_waterman_score(const std::vector<FeatureVector>& seq_a,
                                            const std::vector<FeatureVector>& seq_b,
                                            const ScoringScheme& scheme = {}) {
    scheme.validate();
    detail::check_dims(seq_a, seq_b);
    const std::size_t n = seq_a.size(), m = seq_b.size();

    double best = 0.0;
    std::vector<double> prev(m + 1, 0.0), cur(m + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = 0.0;
        for (std::size_t j = 1; j <= m; ++j) {
            const double sub = scheme.substitution(cosine_similarity(seq_a[i - 1], seq_b[j - 1]));
            double h = prev[j - 1] + sub;
            h = std::max(h, prev[j] - scheme.gap_penalty);
            h = std::max(h, cur[j - 1] - scheme.gap_penalty);
            h = std::max(h, 0.0);
            cur[j] = h;
            best = std::max(best, h);
        }
        std::swap(prev, cur);
    }
    AlignmentResult r;
    r.score = best;
    r.len_a = n;
    r.len_b = m;
    r.normalized = detail::normalize_score(best, n, m, scheme.normalize);
    return r;
}

/// Edit distance with substitution cost (1 - cosine) / 2 and unit-style
/// insert/delete cost from the scheme. Lower is better.
inline AlignmentResult levenshtein_distance(const std::vector<FeatureVector>& seq_a,
                                            const std::vector<FeatureVector>& seq_b,
                                            const ScoringScheme& scheme = {}) {
    scheme.validate();
    detail::check_dims(seq_a, seq_b);
    const std::size_t n = seq_a.size(), m = seq_b.size();

    std::vector<double> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j * scheme.indel_cost;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i * scheme.indel_cost;
        for (std::size_t j = 1; j <= m; ++j) {
            const double sub_cost = ScoringScheme::levenshtein_substitution_cost(
                cosine_similarity(seq_a[i - 1], seq_b[j - 1]));
            cur[j] = std::min({prev[j] + scheme.indel_cost, cur[j - 1] + scheme.indel_cost,
                               prev[j - 1] + sub_cost});
        }
        std::swap(prev, cur);
    }
    AlignmentResult r;
    r.score = prev[m];
    r.len_a = n;
    r.len_b = m;
    r.normalized = detail::normalize_score(r.score, n, m, scheme.normalize);
    return r;
}

enum class AlignMethod { SmithWaterman, Levenshtein };

inline const char* to_string(AlignMethod m) {
    return m == AlignMethod::SmithWaterman ? "smith-waterman" : "levenshtein";
}

struct SimilarityMatrix {
    std::vector<std::string> ids;
    std::vector<double> values;  // row-major N x N
    AlignMethod method = AlignMethod::SmithWaterman;

    double at(std::size_t i, std::size_t j) const { return values[i * ids.size() + j]; }
};

/// Symmetric all-pairs score matrix. Diagonal holds the self-score for
/// Smith-Waterman and 0 for Levenshtein.
inline SimilarityMatrix pairwise_matrix(const std::vector<std::vector<FeatureVector>>& seqs,
                                        AlignMethod method, const ScoringScheme& scheme = {},
                                        const std::vector<std::string>* ids = nullptr) {
    if (seqs.size() < 2) throw std::invalid_argument("pairwise_matrix: need at least 2 sequences");
    const std::size_t n = seqs.size();

    SimilarityMatrix mat;
    mat.method = method;
    mat.values.assign(n * n, 0.0);
    if (ids) {
        if (ids->size() != n) throw std::invalid_argument("pairwise_matrix: id count mismatch");
        mat.ids = *ids;
    } else {
        for (std::size_t i = 0; i < n; ++i) mat.ids.push_back("seq" + std::to_string(i));
    }

    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) cells.emplace_back(i, j);

    std::vector<std::string> errors(cells.size());
    parallel_for(cells.size(), [&](std::size_t k) {
        const auto [i, j] = cells[k];
        try {
            double v;
            if (method == AlignMethod::SmithWaterman)
                v = smith_waterman_score(seqs[i], seqs[j], scheme).score;
            else
                v = i == j ? 0.0 : levenshtein_distance(seqs[i], seqs[j], scheme).score;
            mat.values[i * n + j] = v;
            mat.values[j * n + i] = v;
        } catch (const std::exception& e) {
            errors[k] = "pair (" + std::to_string(i) + "," + std::to_string(j) + "): " + e.what();
        }
    });
    for (const auto& e : errors)
        if (!e.empty()) throw std::runtime_error("pairwise_matrix: " + e);
    return mat;
}

/// CSV with the scheme echoed as comment lines, ids as header row/column.
inline void save_matrix_csv(const SimilarityMatrix& mat, const ScoringScheme& scheme,
                            const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "# method=" << to_string(mat.method) << "\n";
    out << "# substitution=" << (mat.method == AlignMethod::SmithWaterman ? "2*cos-1" : "(1-cos)/2")
        << "\n";
    out << "# gap_penalty=" << format_double(scheme.gap_penalty) << "\n";
    out << "# indel_cost=" << format_double(scheme.indel_cost) << "\n";
    out << "# normalize=" << to_string(scheme.normalize) << "\n";
    const std::size_t n = mat.ids.size();
    out << "id";
    for (const auto& id : mat.ids) out << ',' << id;
    out << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        out << mat.ids[i];
        for (std::size_t j = 0; j < n; ++j) out << ',' << format_double(mat.at(i, j));
        out << '\n';
    }
}

}  // namespace gazedepth

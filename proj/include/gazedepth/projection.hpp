#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazedepth/common.hpp"
#include "gazedepth/features.hpp"

namespace gazedepth {

// ---------------------------------------------------------------------------
// Cyclic Jacobi eigensolver for dense symmetric matrices. Eigenvectors are
// returned column-wise, orthonormal; order follows the input until sorted by
// the caller.

struct SymmetricEigen {
    std::vector<double> values;   // n
    std::vector<double> vectors;  // n x n, vectors[r * n + c] = row r of eigenvector c
};

inline SymmetricEigen jacobi_eigen(std::vector<double> a, std::size_t n) {
    SymmetricEigen out;
    out.values.resize(n);
    out.vectors.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) out.vectors[i * n + i] = 1.0;
    auto& v = out.vectors;

    double prev_off = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < 128; ++sweep) {
        double off = 0.0, total = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = 0; q < n; ++q) {
                const double x = a[p * n + q] * a[p * n + q];
                total += x;
                if (p < q) off += x;
            }
        if (off <= total * 1e-26 || off < 1e-280) break;
        if (sweep > 24 && off >= prev_off) break;  // stalled at rounding noise
        prev_off = off;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k * n + p], vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) out.values[i] = a[i * n + i];
    return out;
}

// ---------------------------------------------------------------------------

struct Embedding2D {
    std::vector<std::array<double, 2>> points;
    std::string method = "pca";
    std::uint64_t seed = 0;
};

enum class ReduceMethod { PCA };

/// Project features onto the top-2 principal components of the mean-centered
/// feature matrix. Sign convention: within each component axis, the loading
/// entry of largest magnitude is made positive. The solver works in whichever
/// of the D x D / N x N spaces is smaller.
inline Embedding2D reduce_2d(const std::vector<FeatureVector>& features,
                             ReduceMethod method = ReduceMethod::PCA, std::uint64_t seed = 0,
                             Warnings* warnings = nullptr) {
    (void)method;  // PCA is the only built-in; the seed is kept for pluggable methods
    const std::size_t n = features.size();
    if (n < 2) throw std::invalid_argument("reduce_2d: need at least 2 points");
    const std::size_t d = features.front().values.size();
    if (d < 2) throw std::invalid_argument("reduce_2d: need dimension >= 2");
    for (const auto& f : features)
        if (f.values.size() != d) throw std::invalid_argument("reduce_2d: dimension mismatch");

    std::vector<double> mean(d, 0.0);
    for (const auto& f : features)
        for (std::size_t k = 0; k < d; ++k) mean[k] += f.values[k];
    for (auto& m : mean) m /= static_cast<double>(n);

    std::vector<double> xc(n * d);
    double total_var = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            const double c = features[i].values[k] - mean[k];
            xc[i * d + k] = c;
            total_var += c * c;
        }

    Embedding2D emb;
    emb.seed = seed;
    emb.points.assign(n, {0.0, 0.0});
    if (total_var < 1e-18) {
        warn(warnings, "reduce_2d: all features identical, embedding collapsed to the origin");
        return emb;
    }

    // two principal loadings, each a unit D-vector
    std::array<std::vector<double>, 2> loadings;
    if (d <= n) {
        std::vector<double> cov(d * d, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t p = 0; p < d; ++p)
                for (std::size_t q = p; q < d; ++q) cov[p * d + q] += xc[i * d + p] * xc[i * d + q];
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = 0; q < p; ++q) cov[p * d + q] = cov[q * d + p];
        auto eig = jacobi_eigen(std::move(cov), d);
        std::vector<std::size_t> order(d);
        for (std::size_t i = 0; i < d; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t x, std::size_t y) { return eig.values[x] > eig.values[y]; });
        for (int c = 0; c < 2; ++c) {
            loadings[c].resize(d);
            for (std::size_t r = 0; r < d; ++r) loadings[c][r] = eig.vectors[r * d + order[c]];
        }
    } else {
        std::vector<double> gram(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < d; ++k) s += xc[i * d + k] * xc[j * d + k];
                gram[i * n + j] = s;
                gram[j * n + i] = s;
            }
        auto eig = jacobi_eigen(std::move(gram), n);
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t x, std::size_t y) { return eig.values[x] > eig.values[y]; });
        for (int c = 0; c < 2; ++c) {
            loadings[c].assign(d, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double u = eig.vectors[i * n + order[c]];
                for (std::size_t k = 0; k < d; ++k) loadings[c][k] += u * xc[i * d + k];
            }
            double nrm = 0.0;
            for (double x : loadings[c]) nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm > 1e-12)
                for (double& x : loadings[c]) x /= nrm;
            else
                std::fill(loadings[c].begin(), loadings[c].end(), 0.0);
        }
    }

    for (auto& axis : loadings) {
        std::size_t arg = 0;
        for (std::size_t k = 1; k < d; ++k)
            if (std::abs(axis[k]) > std::abs(axis[arg])) arg = k;
        if (axis[arg] < 0.0)
            for (double& x : axis) x = -x;
    }

    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 2; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += xc[i * d + k] * loadings[c][k];
            emb.points[i][c] = s;
        }
    return emb;
}

// ---------------------------------------------------------------------------
// Gridification: snap 2D points to distinct cells of a rows x cols grid,
// minimizing total squared displacement via exact linear assignment
// (shortest augmenting path, O(n^2 m)).

struct GridLayout {
    int rows = 0;
    int cols = 0;
    std::vector<int> assignment;  // point i -> cell index row * cols + col
    double total_cost = 0.0;
};

namespace detail {

/// Min-cost assignment of n rows to m >= n columns; returns column per row.
inline std::vector<int> solve_assignment(const std::vector<double>& cost, std::size_t n,
                                         std::size_t m, double* total = nullptr) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    // 1-based potentials over rows/cols; p[j] = row matched to column j
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> match(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    double sum = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
        if (match[j] != 0) {
            row_to_col[match[j] - 1] = static_cast<int>(j - 1);
            sum += cost[(match[j] - 1) * m + (j - 1)];
        }
    }
    if (total) *total = sum;
    return row_to_col;
}

}  // namespace detail

/// Smallest square grid holding n points.
inline std::pair<int, int> grid_auto_dims(std::size_t n) {
    const int side = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))));
    return {side, side};
}

inline GridLayout gridify(const Embedding2D& emb, int rows, int cols) {
    const std::size_t n = emb.points.size();
    if (rows < 1 || cols < 1 || static_cast<std::size_t>(rows) * cols < n)
        throw std::invalid_argument("gridify: grid has fewer cells than points");

    // scale the embedding bounding box onto cell-center coordinates
    double min_x = emb.points[0][0], max_x = min_x;
    double min_y = emb.points[0][1], max_y = min_y;
    for (const auto& p : emb.points) {
        min_x = std::min(min_x, p[0]);
        max_x = std::max(max_x, p[0]);
        min_y = std::min(min_y, p[1]);
        max_y = std::max(max_y, p[1]);
    }
    auto scale = [](double v, double lo, double hi, int extent) {
        if (hi - lo < 1e-15) return (extent - 1) / 2.0;
        return (v - lo) / (hi - lo) * (extent - 1);
    };

    const std::size_t m = static_cast<std::size_t>(rows) * cols;
    std::vector<double> cost(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        const double px = scale(emb.points[i][0], min_x, max_x, cols);
        const double py = scale(emb.points[i][1], min_y, max_y, rows);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                const double dx = px - c, dy = py - r;
                cost[i * m + static_cast<std::size_t>(r) * cols + c] = dx * dx + dy * dy;
            }
    }

    GridLayout layout;
    layout.rows = rows;
    layout.cols = cols;
    layout.assignment = detail::solve_assignment(cost, n, m, &layout.total_cost);
    return layout;
}

/// Layout CSV: point_id,row,col,x2d,y2d
inline void save_layout_csv(const GridLayout& layout, const Embedding2D& emb,
                            const std::filesystem::path& path) {
    if (layout.assignment.size() != emb.points.size())
        throw std::invalid_argument("save_layout_csv: layout/embedding size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "point_id,row,col,x2d,y2d\n";
    for (std::size_t i = 0; i < emb.points.size(); ++i) {
        const int cell = layout.assignment[i];
        out << i << ',' << cell / layout.cols << ',' << cell % layout.cols << ','
            << format_double(emb.points[i][0]) << ',' << format_double(emb.points[i][1]) << '\n';
    }
}

}  // namespace gazedepth

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazedepth/common.hpp"

namespace gazedepth {

struct TestReport {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    std::string method;
    bool exact = false;
};

// ---------------------------------------------------------------------------
// Normal distribution helpers

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi); }

/// Inverse standard normal CDF by bracketed bisection refined with Newton.
inline double normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("normal_quantile: p must be in (0,1)");
    double lo = -1.0, hi = 1.0;
    while (normal_cdf(lo) > p) lo *= 2.0;
    while (normal_cdf(hi) < p) hi *= 2.0;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    double z = 0.5 * (lo + hi);
    for (int i = 0; i < 8; ++i) {
        const double err = normal_cdf(z) - p;
        const double d = normal_pdf(z);
        if (d <= 0.0) break;
        const double step = err / d;
        z -= step;
        if (std::abs(step) < 1e-16) break;
    }
    return z;
}

// ---------------------------------------------------------------------------
// Regularized incomplete beta via Lentz's continued fraction; drives the
// Student t CDF.

namespace detail {

inline double betacf(double a, double b, double x) {
    constexpr int kMaxIt = 300;
    constexpr double kEps = 3e-16, kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIt; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace detail

inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double bt =
        std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                 b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * detail::betacf(a, b, x) / a;
    return 1.0 - bt * detail::betacf(b, a, 1.0 - x) / b;
}

inline double student_t_two_sided_p(double t, double dof) {
    if (!(dof > 0.0)) throw std::domain_error("student_t_two_sided_p: dof must be > 0");
    return incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

// ---------------------------------------------------------------------------
// Shapiro-Wilk W test, Royston's AS R94 approximation. Valid for 3 <= n <= 5000.

inline TestReport shapiro_wilk(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 3 || n > 5000) throw std::invalid_argument("shapiro_wilk: n must be in [3, 5000]");

    std::vector<double> xs(x.begin(), x.end());
    std::sort(xs.begin(), xs.end());
    if (xs.front() == xs.back())
        throw std::invalid_argument("shapiro_wilk: constant sample, W undefined");

    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i)
        m[i] = normal_quantile((i + 1 - 0.375) / (n + 0.25));
    const double ssq = std::inner_product(m.begin(), m.end(), m.begin(), 0.0);

    std::vector<double> a(n, 0.0);
    if (n == 3) {
        a[0] = -std::sqrt(0.5);
        a[2] = std::sqrt(0.5);
    } else {
        const double u = 1.0 / std::sqrt(static_cast<double>(n));
        const double cn = m[n - 1] / std::sqrt(ssq);
        const double an = cn + u * (0.221157 + u * (-0.147981 + u * (-2.071190 +
                                    u * (4.434685 + u * -2.706056))));
        if (n > 5) {
            const double cn1 = m[n - 2] / std::sqrt(ssq);
            const double an1 = cn1 + u * (0.042981 + u * (-0.293762 + u * (-1.752461 +
                                          u * (5.682633 + u * -3.582633))));
            const double fac = std::sqrt((ssq - 2.0 * m[n - 1] * m[n - 1] -
                                          2.0 * m[n - 2] * m[n - 2]) /
                                         (1.0 - 2.0 * an * an - 2.0 * an1 * an1));
            a[n - 1] = an;
            a[n - 2] = an1;
            a[0] = -an;
            a[1] = -an1;
            for (std::size_t i = 2; i < n - 2; ++i) a[i] = m[i] / fac;
        } else {
            const double fac =
                std::sqrt((ssq - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * an * an));
            a[n - 1] = an;
            a[0] = -an;
            for (std::size_t i = 1; i < n - 1; ++i) a[i] = m[i] / fac;
        }
    }

    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ssx = 0.0, num = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ssx += (xs[i] - mean) * (xs[i] - mean);
        num += a[i] * xs[i];
    }
    double w = num * num / ssx;
    w = std::min(w, 1.0);

    double p;
    if (n == 3) {
        p = 6.0 / kPi * (std::asin(std::sqrt(w)) - std::asin(std::sqrt(0.75)));
        p = std::clamp(p, 0.0, 1.0);
    } else if (1.0 - w < 1e-99) {
        p = 1.0;
    } else {
        double w1, mu, sigma;
        const double dn = static_cast<double>(n);
        if (n <= 11) {
            const double g = -2.273 + 0.459 * dn;
            w1 = -std::log(g - std::log1p(-w));
            mu = 0.5440 + dn * (-0.39978 + dn * (0.025054 + dn * -0.0006714));
            sigma = std::exp(1.3822 + dn * (-0.77857 + dn * (0.062767 + dn * -0.0020322)));
        } else {
            const double ln = std::log(dn);
            w1 = std::log1p(-w);
            mu = -1.5861 + ln * (-0.31082 + ln * (-0.083751 + ln * 0.0038915));
            sigma = std::exp(-0.4803 + ln * (-0.082676 + ln * 0.0030302));
        }
        p = 1.0 - normal_cdf((w1 - mu) / sigma);
    }

    TestReport r;
    r.statistic = w;
    r.p_value = p;
    r.n = n;
    r.method = "shapiro-wilk";
    r.exact = false;
    return r;
}

// ---------------------------------------------------------------------------
// Two-sided paired Student's t-test.

inline TestReport paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("paired_t_test: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) throw std::invalid_argument("paired_t_test: need n >= 2 pairs");

    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(n - 1);
    if (!(var > 0.0))
        throw std::invalid_argument("paired_t_test: zero-variance differences, t undefined");

    const double t = mean / std::sqrt(var / static_cast<double>(n));
    TestReport r;
    r.statistic = t;
    r.p_value = student_t_two_sided_p(t, static_cast<double>(n - 1));
    r.n = n;
    r.method = "paired-t";
    r.exact = false;
    return r;
}

// ---------------------------------------------------------------------------
// Two-sided Wilcoxon signed-rank test. Zero differences are dropped before
// ranking; ties take midranks. Exact two-sided p (2 * smaller tail over all
// 2^m sign assignments, computed by convolution) for m <= 25, otherwise the
// normal approximation with tie correction.

inline constexpr std::size_t kWilcoxonExactLimit = 25;

inline TestReport wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("wilcoxon_signed_rank: length mismatch");

    std::vector<double> diffs;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d != 0.0) diffs.push_back(d);
    }
    const std::size_t m = diffs.size();
    if (m == 0)
        throw std::invalid_argument("wilcoxon_signed_rank: all differences zero, W undefined");

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return std::abs(diffs[i]) < std::abs(diffs[j]); });

    std::vector<double> rank(m, 0.0);
    std::vector<std::size_t> tie_sizes;
    for (std::size_t i = 0; i < m;) {
        std::size_t j = i;
        while (j + 1 < m && std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) ++j;
        const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        tie_sizes.push_back(j - i + 1);
        i = j + 1;
    }

    double w_plus = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        if (diffs[i] > 0.0) w_plus += rank[i];
    const double total = static_cast<double>(m) * (m + 1) / 2.0;
    const double w_minus = total - w_plus;

    TestReport r;
    r.statistic = std::min(w_plus, w_minus);
    r.n = m;
    r.method = "wilcoxon-signed-rank";

    if (m <= kWilcoxonExactLimit) {
        // null distribution of 2*W+ over all sign assignments (midranks double
        // to exact integers)
        std::vector<long> r2(m);
        long sum2 = 0;
        for (std::size_t i = 0; i < m; ++i) {
            r2[i] = std::lround(rank[i] * 2.0);
            sum2 += r2[i];
        }
        std::vector<double> count(sum2 + 1, 0.0);
        count[0] = 1.0;
        for (std::size_t i = 0; i < m; ++i)
            for (long s = sum2; s >= r2[i]; --s) count[s] += count[s - r2[i]];
        const double denom = std::ldexp(1.0, static_cast<int>(m));  // 2^m
        const long w2 = std::lround(w_plus * 2.0);
        double le = 0.0, ge = 0.0;
        for (long s = 0; s <= sum2; ++s) {
            if (s <= w2) le += count[s];
            if (s >= w2) ge += count[s];
        }
        r.p_value = std::min(1.0, 2.0 * std::min(le, ge) / denom);
        r.exact = true;
    } else {
        const double dm = static_cast<double>(m);
        double tie_term = 0.0;
        for (std::size_t t : tie_sizes) {
            const double dt = static_cast<double>(t);
            tie_term += dt * dt * dt - dt;
        }
        const double mean = dm * (dm + 1.0) / 4.0;
        const double var = dm * (dm + 1.0) * (2.0 * dm + 1.0) / 24.0 - tie_term / 48.0;
        if (!(var > 0.0))
            throw std::invalid_argument("wilcoxon_signed_rank: degenerate rank variance");
        const double z = (w_plus - mean) / std::sqrt(var);
        r.p_value = std::min(1.0, 2.0 * (1.0 - normal_cdf(std::abs(z))));
        r.exact = false;
    }
    return r;
}

}  // namespace gazedepth

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "encost/errors.hpp"

namespace encost {

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw EmptyInputError("mean of empty list");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Divisor m (biased); used where the contract asks for population spread.
inline double population_stddev(const std::vector<double>& v) {
    const double mu = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return std::sqrt(s / static_cast<double>(v.size()));
}

// Divisor m-1; the measurement stopping rule uses this one.
inline double sample_stddev(const std::vector<double>& v) {
    if (v.size() < 2) throw InsufficientSamplesError("sample stddev needs at least 2 values");
    const double mu = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

namespace detail {

inline double ln_gamma(double x) {
    // Lanczos approximation, g = 7.
    static const double coef[9] = {
        0.99999999999980993,  676.5203681218851,    -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,  12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (x < 0.5) {
        // Reflection for the small-argument half.
        return std::log(M_PI / std::sin(M_PI * x)) - ln_gamma(1.0 - x);
    }
    x -= 1.0;
    double a = coef[0];
    double t = x + 7.5;
    for (int i = 1; i < 9; ++i) a += coef[i] / (x + i);
    return 0.5 * std::log(2.0 * M_PI) + (x + 0.5) * std::log(t) - t + std::log(a);
}

// Continued fraction for the regularized incomplete beta (Lentz's method).
inline double beta_continued_fraction(double a, double b, double x) {
    const double tiny = 1e-300;
    const double eps = 1e-15;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0)
        throw DomainError("incomplete_beta: nonpositive shape parameter");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = detail::ln_gamma(a + b) - detail::ln_gamma(a) -
                            detail::ln_gamma(b) + a * std::log(x) +
                            b * std::log(1.0 - x);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(ln_front) * detail::beta_continued_fraction(a, b, x) / a;
    return 1.0 - std::exp(detail::ln_gamma(a + b) - detail::ln_gamma(b) -
                          detail::ln_gamma(a) + b * std::log(1.0 - x) +
                          a * std::log(x)) *
                     detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// CDF of Student's t with df degrees of freedom.
inline double student_t_cdf(double t, int df) {
    if (df < 1) throw DomainError("student_t_cdf: df must be >= 1");
    const double x = df / (df + t * t);
    const double p = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
    return t >= 0.0 ? 1.0 - p : p;
}

// One-sided quantile: returns q with P(T <= q) = p. The stopping rule's
// t_alpha(df) is this function at p = alpha.
inline double student_t_quantile(double p, int df) {
    if (df < 1) throw DomainError("student_t_quantile: df must be >= 1");
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("student_t_quantile: p must be in (0, 1)");
    if (p == 0.5) return 0.0;
    if (p < 0.5) return -student_t_quantile(1.0 - p, df);

    double lo = 0.0, hi = 1.0;
    while (student_t_cdf(hi, df) < p) {
        hi *= 2.0;
        if (hi > 1e12) break;
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, df) < p) lo = mid;
        else hi = mid;
        if (hi - lo <= 1e-12 * std::max(1.0, lo)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace encost

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "errors.hpp"

namespace mmwbf {

// Exponentially scaled I0: e^{-|x|} I0(x).
inline double bessel_i0e(double x)
{
    x = std::abs(x);
    if (x <= 20.0) {
        // power series sum (x^2/4)^k / (k!)^2
        const double y = 0.25 * x * x;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            term *= y / (static_cast<double>(k) * k);
            sum += term;
            if (term < 1e-17 * sum)
                break;
        }
        return sum * std::exp(-x);
    }
    // asymptotic expansion, truncated at its smallest term
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 100; ++k) {
        const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
        if (next >= term)
            break;
        term = next;
        sum += term;
        if (term < 1e-17 * sum)
            break;
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

inline double bessel_i0(double x)
{
    const double ax = std::abs(x);
    if (ax > 713.0)
        return std::numeric_limits<double>::infinity();
    return bessel_i0e(ax) * std::exp(ax);
}

namespace detail {

// Ratio estimate I_k(x) / I_{k-1}(x) (Amos), used to seed the backward recurrence.
inline double bessel_ratio_guess(double k, double x) { return x / (k - 0.5 + std::sqrt((k + 0.5) * (k + 0.5) + x * x)); }

// Sum_{k >= k0} r^k e^{-x} I_k(x) for 0 <= r <= 1, x >= 0, k0 in {0, 1}.
inline double scaled_bessel_series(double r, double x, int k0)
{
    const double i0e = bessel_i0e(x);
    if (x == 0.0 || r == 0.0)
        return k0 == 0 ? i0e : 0.0;

    // locate the truncation point with the approximate ratios
    constexpr int cap = 50'000'000;
    int n = 1;
    {
        double t = 1.0, s = 1.0;
        for (; n < cap; ++n) {
            t *= r * bessel_ratio_guess(n, x);
            s += t;
            if (t < 1e-18 * s)
                break;
        }
        if (n >= cap)
            warn("Bessel series truncated at the term cap; result may be inaccurate");
    }
    // backward recurrence for exact ratios r_k = I_k / I_{k-1}
    const int start = n + static_cast<int>(std::ceil(std::sqrt(40.0 * x))) + 30;
    std::vector<double> ratio(static_cast<std::size_t>(n) + 1);
    double rk = bessel_ratio_guess(start + 1, x);
    for (int k = start; k >= 1; --k) {
        rk = 1.0 / (2.0 * k / x + rk);
        if (k <= n)
            ratio[static_cast<std::size_t>(k)] = rk;
    }
    double t = i0e, s = k0 == 0 ? i0e : 0.0;
    for (int k = 1; k <= n; ++k) {
        t *= r * ratio[static_cast<std::size_t>(k)];
        s += t;
    }
    return s;
}

} // namespace detail

// Scaled modified Bessel function e^{-x} I_n(x) for integer n >= 0, x >= 0.
inline double bessel_ine(int n, double x)
{
    if (n < 0)
        n = -n;
    x = std::abs(x);
    const double i0e = bessel_i0e(x);
    if (n == 0)
        return i0e;
    if (x == 0.0)
        return 0.0;
    const int start = n + static_cast<int>(std::ceil(std::sqrt(40.0 * x))) + 30;
    double rk = detail::bessel_ratio_guess(start + 1, x);
    double prod = 1.0;
    for (int k = start; k >= 1; --k) {
        rk = 1.0 / (2.0 * k / x + rk);
        if (k <= n)
            prod *= rk;
    }
    return i0e * prod;
}

// First-order Marcum Q function Q1(a, b) = int_b^inf x e^{-(x^2+a^2)/2} I0(a x) dx,
// evaluated from its Bessel series in scaled form, so no argument range overflows.
inline double marcum_q1(double a, double b)
{
    if (a < 0.0 || b < 0.0 || std::isnan(a) || std::isnan(b))
        throw DomainError("Marcum Q arguments must be nonnegative");
    if (b == 0.0)
        return 1.0;
    if (a == 0.0)
        return std::exp(-0.5 * b * b);
    const double x = a * b;
    const double g = std::exp(-0.5 * (a - b) * (a - b));
    if (a < b)
        return std::clamp(g * detail::scaled_bessel_series(a / b, x, 0), 0.0, 1.0);
    return std::clamp(1.0 - g * detail::scaled_bessel_series(b / a, x, 1), 0.0, 1.0);
}

// Regularized upper incomplete gamma Gamma(a, x) / Gamma(a).
inline double reg_upper_gamma(double a, double x)
{
    if (!(a > 0.0) || x < 0.0 || std::isnan(x))
        throw DomainError("upper incomplete gamma needs a > 0 and x >= 0");
    if (x == 0.0)
        return 1.0;
    const double log_pref = -x + a * std::log(x) - std::lgamma(a);
    if (x < a + 1.0) {
        // series for the lower function P
        double ap = a, term = 1.0 / a, sum = term;
        for (int n = 0; n < 100000; ++n) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-17)
                break;
        }
        return std::clamp(1.0 - sum * std::exp(log_pref), 0.0, 1.0);
    }
    // modified Lentz continued fraction for Q
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16)
            break;
    }
    return std::clamp(std::exp(log_pref) * h, 0.0, 1.0);
}

} // namespace mmwbf

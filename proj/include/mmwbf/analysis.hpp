// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "codebook.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "special.hpp"

namespace mmwbf {

// Noiseless magnitudes of the optimal and a competing sounding, with the training SNR.
struct PairwiseGains {
    double gamma_opt = 0.0;
    double gamma_alt = 0.0;
    double rho = 0.0;

    double U() const { return 0.5 * rho * (gamma_opt * gamma_opt + gamma_alt * gamma_alt); }
    double V() const { return rho * gamma_opt * gamma_alt; }
    double W() const { return 0.5 * rho * (gamma_opt * gamma_opt - gamma_alt * gamma_alt); }
};

inline void validate(const PairwiseGains& g)
{
    if (!(g.gamma_opt >= 0.0) || !(g.gamma_alt >= 0.0) || !(g.rho >= 0.0) || !std::isfinite(g.rho))
        throw DomainError("pairwise gains and SNR must be finite and nonnegative");
}

inline double clamp_probability(double p, const char* what)
{
    if (std::isnan(p))
        throw DomainError(std::string(what) + ": probability is NaN");
    if (p < 0.0 || p > 1.0) {
        warn(std::string(what) + ": probability " + std::to_string(p) + " clamped to [0, 1]");
        return std::clamp(p, 0.0, 1.0);
    }
    return p;
}

// Prob(|y_opt|^2 < |y_alt|^2) = Q1(sqrt(rho) g_alt, sqrt(rho) g_opt)
//                              - 1/2 I0(rho g_alt g_opt) exp(-rho (g_alt^2 + g_opt^2) / 2).
// Both terms share the factor exp(-(b - a)^2 / 2) after scaling the Bessel
// functions, which removes the cancellation between them.
inline double pairwise_exact(const PairwiseGains& g, bool* underflow = nullptr)
{
    validate(g);
    if (underflow)
        *underflow = false;
    const double a = std::sqrt(g.rho) * g.gamma_alt;
    const double b = std::sqrt(g.rho) * g.gamma_opt;
    if (a == b)
        return 0.5;
    const double x = a * b;
    const double e = -0.5 * (b - a) * (b - a);
    if (a < b) {
        if (e < -745.0) {
            if (underflow)
                *underflow = true;
            return 0.0;
        }
        const double s = detail::scaled_bessel_series(a / b, x, 1) + 0.5 * bessel_i0e(x);
        return clamp_probability(std::exp(e) * s, "pairwise_exact");
    }
    // competitor stronger than the reference: complement form
    const double s = detail::scaled_bessel_series(b / a, x, 1) + 0.5 * bessel_i0e(x);
    return clamp_probability(1.0 - std::exp(e) * s, "pairwise_exact");
}

// Finite-sum approximation of the pairwise probability with truncation order k.
// The incomplete gamma in each term is the non-normalized Gamma(l+1, x) = l! Q(l+1, x).
inline double pairwise_closed_form(const PairwiseGains& g, int k = 10)
{
    validate(g);
    if (k < 1)
        throw DomainError("truncation order must be at least one");
    const double ha = 0.5 * g.rho * g.gamma_alt * g.gamma_alt; // rho gamma_alt^2 / 2
    const double x = 0.5 * g.rho * g.gamma_opt * g.gamma_opt;  // rho gamma_opt^2 / 2
    const double kd = static_cast<double>(k);
    double sum = 0.0;
    for (int l = 0; l <= k; ++l) {
        const double ld = static_cast<double>(l);
        double log_coef = std::lgamma(kd + ld) + (1.0 - 2.0 * ld) * std::log(kd) - 2.0 * std::lgamma(ld + 1.0) -
                          std::lgamma(kd - ld + 1.0) - ha;
        if (l > 0) {
            if (ha == 0.0)
                break;
            log_coef += ld * std::log(ha);
        }
        // Gamma(l+1, x) - x^l e^{-x} / 2, written as e^{-x} (sum_{j<=l} x^j l!/j! - x^l / 2)
        // once the normalized function underflows
        double bracket;
        if (x < 600.0) {
            // normalized by l! so large orders do not overflow
            const double lfact = std::lgamma(ld + 1.0);
            const double pow_term = l == 0 ? 0.5 * std::exp(-x) : 0.5 * std::exp(ld * std::log(x) - x - lfact);
            bracket = reg_upper_gamma(ld + 1.0, x) - pow_term;
            if (bracket <= 0.0)
                continue;
            sum += std::exp(log_coef + lfact + std::log(bracket));
        } else {
            double inner = 0.0, t = 1.0; // t = x^j l! / j! / x^l, accumulated from j = l downward
            for (int j = l; j >= 0; --j) {
                inner += t;
                t *= static_cast<double>(j) / x;
            }
            inner -= 0.5;
            if (inner <= 0.0)
                continue;
            sum += std::exp(log_coef + ld * std::log(x) - x + std::log(inner));
        }
    }
    return clamp_probability(sum, "pairwise_closed_form");
}

// sqrt((U+V)/(8V)) erfc(sqrt(U-V))
inline double pairwise_asymptotic_erfc(const PairwiseGains& g)
{
    validate(g);
    if (!(g.gamma_opt > g.gamma_alt))
        throw DomainError("asymptotic form needs gamma_opt > gamma_alt");
    const double v = g.V();
    if (!(v > 0.0))
        throw DomainError("asymptotic form is singular for V = 0");
    const double u = g.U();
    return std::sqrt((u + v) / (8.0 * v)) * std::erfc(std::sqrt(u - v));
}

// sqrt((g_opt + g_alt)^2 / (8 g_opt g_alt)) exp(-rho (g_opt - g_alt)^2 / 2)
inline double pairwise_asymptotic_exp(const PairwiseGains& g)
{
    validate(g);
    if (!(g.gamma_opt > g.gamma_alt))
        throw DomainError("asymptotic form needs gamma_opt > gamma_alt");
    if (!(g.gamma_alt > 0.0) || !(g.rho > 0.0))
        throw DomainError("asymptotic form is singular for V = 0");
    const double s = g.gamma_opt + g.gamma_alt;
    const double d = g.gamma_opt - g.gamma_alt;
    return std::sqrt(s * s / (8.0 * g.gamma_opt * g.gamma_alt)) * std::exp(-0.5 * g.rho * d * d);
}

struct MisalignmentBounds {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t opt_index = 0;
};

namespace detail {
inline std::size_t argmax_lowest(const std::vector<double>& v)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best])
            best = i;
    return best;
}
} // namespace detail

// Bounds on the misalignment probability of a fixed channel whose noiseless
// sounding magnitudes are `gammas`: the optimum is the largest entry; the
// lower bound is the largest pairwise term and the upper bound the union over
// all competitors.
inline MisalignmentBounds misalignment_bounds(const std::vector<double>& gammas, double rho)
{
    if (gammas.empty())
        throw DomainError("misalignment bounds need at least one sounding");
    MisalignmentBounds r;
    r.opt_index = detail::argmax_lowest(gammas);
    for (std::size_t l = 0; l < gammas.size(); ++l) {
        if (l == r.opt_index)
            continue;
        const double p = pairwise_exact({gammas[r.opt_index], gammas[l], rho});
        r.lower = std::max(r.lower, p);
        r.upper += p;
    }
    // probabilities; the union sum may exceed one at low SNR
    r.upper = std::min(r.upper, 1.0);
    return r;
}

// Averaged double sum (1/L) sum_opt sum_{l != opt} P(gamma_opt, gamma_l) over a
// uniform prior on which sounding is optimal; one gain vector per hypothesis.
inline MisalignmentBounds misalignment_bounds_averaged(const std::vector<std::vector<double>>& gains_per_hypothesis,
                                                       double rho)
{
    if (gains_per_hypothesis.empty())
        throw DomainError("misalignment bounds need at least one hypothesis");
    MisalignmentBounds r;
    double lower = 0.0, upper = 0.0;
    for (const auto& g : gains_per_hypothesis) {
        const MisalignmentBounds b = misalignment_bounds(g, rho);
        lower += b.lower;
        upper += b.upper;
    }
    r.lower = lower / static_cast<double>(gains_per_hypothesis.size());
    r.upper = upper / static_cast<double>(gains_per_hypothesis.size());
    return r;
}

// Noiseless magnitudes |z_j^* H f_i| for all pairs, combiner-major (l = j |F| + i).
inline std::vector<double> sounding_magnitudes(const CMatrix& h, const Codebook& f, const Codebook& z)
{
    const CMatrix fm = detail::stack_beams(f);
    const CMatrix zm = detail::stack_beams(z);
    if (h.cols() != fm.rows() || h.rows() != zm.rows())
        throw DomainError("channel dimensions do not match the codebooks");
    const CMatrix y = zm.adjoint() * h * fm;
    std::vector<double> g(static_cast<std::size_t>(y.size()));
    for (Eigen::Index j = 0; j < y.rows(); ++j)
        for (Eigen::Index i = 0; i < y.cols(); ++i)
            g[static_cast<std::size_t>(j * y.cols() + i)] = std::abs(y(j, i));
    return g;
}

struct ProbabilityEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t trials = 0;
};

// Fraction of trials in which the noisy argmax over all sounded pairs differs
// from the noiseless one; trial t uses make_stream(seed, t).
inline ProbabilityEstimate monte_carlo_pmis(const CMatrix& h, const Codebook& f, const Codebook& z, double rho,
                                            std::size_t trials, std::uint64_t seed, int threads = 1)
{
    if (trials < 1)
        throw ConfigError("Monte Carlo needs at least one trial");
    if (!(rho >= 0.0))
        throw DomainError("SNR must be nonnegative");
    const CMatrix fm = detail::stack_beams(f);
    const CMatrix zm = detail::stack_beams(z);
    if (h.cols() != fm.rows() || h.rows() != zm.rows())
        throw DomainError("channel dimensions do not match the codebooks");
    const CMatrix ym = zm.adjoint() * h * fm;
    const std::size_t n = static_cast<std::size_t>(ym.size());
    std::vector<cplx> mean(n);
    std::vector<double> mag2(n);
    for (Eigen::Index j = 0; j < ym.rows(); ++j)
        for (Eigen::Index i = 0; i < ym.cols(); ++i) {
            const std::size_t l = static_cast<std::size_t>(j * ym.cols() + i);
            mean[l] = std::sqrt(rho) * ym(j, i);
            mag2[l] = std::norm(ym(j, i));
        }
    const std::size_t opt = detail::argmax_lowest(mag2);

    std::vector<unsigned char> miss(trials, 0);
    parallel_for(trials, threads, [&](std::size_t t) {
        Rng rng = make_stream(seed, t);
        std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
        std::size_t best = 0;
        double best_v = -1.0;
        for (std::size_t l = 0; l < n; ++l) {
            const double re = mean[l].real() + nd(rng);
            const double im = mean[l].imag() + nd(rng);
            const double v = re * re + im * im;
            if (v > best_v) {
                best_v = v;
                best = l;
            }
        }
        miss[t] = best != opt;
    });
    std::size_t count = 0;
    for (unsigned char m : miss)
        count += m;
    ProbabilityEstimate e;
    e.trials = trials;
    e.value = static_cast<double>(count) / static_cast<double>(trials);
    e.stderr_ = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(trials));
    return e;
}

} // namespace mmwbf

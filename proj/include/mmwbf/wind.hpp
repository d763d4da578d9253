// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <ostream>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "analysis.hpp"
#include "manifold.hpp"
#include "random.hpp"

namespace mmwbf {

struct WindEnvironment {
    double mean_speed = 13.0;     // m/s
    double air_density = 1.22;    // kg/m^3
    double drag_coefficient = 0.5;
    double effective_area = 0.09; // m^2
    double roughness = 2.0;       // z0, m
    double pole_diameter = 0.5;   // m
    double strouhal = 0.2;
    double vortex_frequency_override = 0.0; // Hz; 0 uses S u / d_p
    bool vortex_shedding = true;

    static constexpr double height = 10.0; // m

    void validate() const
    {
        for (double v : {mean_speed, air_density, drag_coefficient, effective_area, roughness, pole_diameter, strouhal})
            if (!(v > 0.0) || !std::isfinite(v))
                throw ConfigError("wind environment parameters must be positive and finite");
        if (!(roughness < height))
            throw ConfigError("roughness length must be below the reference height");
        if (vortex_frequency_override < 0.0)
            throw ConfigError("vortex frequency override must be nonnegative");
    }

    // u_* = u / (2.5 ln(10 / z0))
    double shear_velocity() const { return mean_speed / (2.5 * std::log(height / roughness)); }
    // kappa = rho_a C_D A_e / 2
    double kappa() const { return 0.5 * air_density * drag_coefficient * effective_area; }
};

struct PoleDynamics {
    double natural_frequency = 1.0; // Hz
    double damping = 0.002;
    double mass = 5.0; // kg

    void validate() const
    {
        if (!(natural_frequency > 0.0) || !(damping > 0.0 && damping < 1.0) || !(mass > 0.0))
            throw ConfigError("pole dynamics need f_n > 0, 0 < zeta < 1 and m > 0");
    }
};

struct SwayConfig {
    double distance = 50.0;   // m
    int elements = 32;        // M
    double alpha = 0.3578;    // fraction of the beamwidth tolerated
    double sample_rate = 32.0; // Hz
    double duration = 600.0;  // s
    double wind_angle = 0.0;  // rad between the mean wind and the link normal; 0 is the worst case

    void validate() const
    {
        if (!(distance > 0.0))
            throw ConfigError("link distance must be positive");
        if (elements < 1)
            throw ConfigError("array size must be positive");
        if (!(sample_rate >= 20.0))
            throw ConfigError("sample rate must be at least 20 Hz");
        if (!(duration > 0.0))
            throw ConfigError("duration must be positive");
        if (!(alpha > 0.0))
            throw ConfigError("alpha must be positive");
    }

    std::size_t samples() const { return static_cast<std::size_t>(std::ceil(sample_rate * duration - 1e-9)); }
};

// Along-wind turbulence PSD, m^2/s^2/Hz
inline double spectrum_along(double f, const WindEnvironment& env)
{
    if (f < 0.0)
        throw DomainError("frequency must be nonnegative");
    const double u = env.mean_speed, us = env.shear_velocity();
    return 500.0 * us * us / (pi * u) * std::pow(1.0 + 500.0 * f / (2.0 * pi * u), -5.0 / 3.0);
}

// Across-wind turbulence PSD, m^2/s^2/Hz
inline double spectrum_across(double f, const WindEnvironment& env)
{
    if (f < 0.0)
        throw DomainError("frequency must be nonnegative");
    const double u = env.mean_speed, us = env.shear_velocity();
    return 75.0 * us * us / (2.0 * pi * u) * std::pow(1.0 + 95.0 * f / (2.0 * pi * u), -5.0 / 3.0);
}

struct ForcePsd {
    double along = 0.0;  // N^2/Hz
    double across = 0.0; // N^2/Hz
};

inline ForcePsd force_psds(double f, const WindEnvironment& env)
{
    const double ku = env.kappa() * env.mean_speed;
    return {4.0 * ku * ku * spectrum_along(f, env), ku * ku * spectrum_across(f, env)};
}

// f_vs = S u / d_p unless overridden
inline double vortex_frequency(const WindEnvironment& env)
{
    if (env.vortex_frequency_override > 0.0)
        return env.vortex_frequency_override;
    return env.strouhal * env.mean_speed / env.pole_diameter;
}

// kappa^2 1.125 / (sqrt(pi) f f_vs) exp(-((1 - f/f_vs) / 0.18)^2); 0 at f = 0.
inline double vortex_psd(double f, const WindEnvironment& env)
{
    if (f < 0.0)
        throw DomainError("frequency must be nonnegative");
    if (f == 0.0)
        return 0.0;
    const double fvs = vortex_frequency(env);
    const double k = env.kappa();
    const double e = (1.0 - f / fvs) / 0.18;
    return k * k * 1.125 / (std::sqrt(pi) * f * fvs) * std::exp(-e * e);
}

// Pole-top displacement per unit force, m/N
inline double mech_transfer(double f, const PoleDynamics& p)
{
    if (f < 0.0)
        throw DomainError("frequency must be nonnegative");
    const double r = f / p.natural_frequency;
    const double s = (1.0 - r * r) * (1.0 - r * r) + 4.0 * p.damping * p.damping * r * r;
    return 1.0 / (4.0 * p.mass * pi * pi * p.natural_frequency * p.natural_frequency * std::sqrt(s));
}

inline double displacement_psd_along(double f, const WindEnvironment& env, const PoleDynamics& p)
{
    const double h = mech_transfer(f, p);
    return h * h * force_psds(f, env).along;
}

inline double displacement_psd_across(double f, const WindEnvironment& env, const PoleDynamics& p)
{
    const double h = mech_transfer(f, p);
    const double vs = env.vortex_shedding ? vortex_psd(f, env) : 0.0;
    return h * h * (force_psds(f, env).across + vs);
}

inline std::size_t next_pow2(std::size_t n)
{
    std::size_t p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

// Spectral representation: x(t) = sum_k sqrt(2 S(f_k) df) cos(2 pi f_k t + phi_k)
// over the FFT bins strictly between DC and Nyquist, phases i.i.d. uniform,
// evaluated by one inverse FFT on the next power-of-two length; the first
// ceil(fs T) samples are returned.
inline std::vector<double> synthesize_trajectory(const std::function<double(double)>& psd, double fs, double duration,
                                                 Rng& rng)
{
    if (!(fs > 0.0) || !(duration > 0.0))
        throw ConfigError("sample rate and duration must be positive");
    const std::size_t n_out = static_cast<std::size_t>(std::ceil(fs * duration - 1e-9));
    const std::size_t n = next_pow2(std::max<std::size_t>(n_out, 2));
    const double df = fs / static_cast<double>(n);
    std::vector<std::complex<double>> spec(n, {0.0, 0.0});
    std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
    for (std::size_t k = 1; k < n / 2; ++k) {
        const double s = psd(static_cast<double>(k) * df);
        if (!std::isfinite(s) || s < 0.0)
            throw ConfigError("target PSD must be finite and nonnegative on the synthesis grid");
        const double amp = std::sqrt(2.0 * s * df);
        const std::complex<double> c = std::polar(0.5 * amp * static_cast<double>(n), phase(rng));
        spec[k] = c;
        spec[n - k] = std::conj(c);
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> time;
    fft.inv(time, spec);
    std::vector<double> x(n_out);
    for (std::size_t i = 0; i < n_out; ++i)
        x[i] = time[i].real();
    return x;
}

// theta_L = atan(dL_d / (D + dL_c)) with dL = pole A - pole B.
inline std::vector<double> sway_angle_series(const std::vector<double>& a_d, const std::vector<double>& b_d,
                                             const std::vector<double>& a_c, const std::vector<double>& b_c, double d)
{
    if (a_d.size() != b_d.size() || a_d.size() != a_c.size() || a_d.size() != b_c.size())
        throw DomainError("trajectory lengths differ");
    if (!(d > 0.0))
        throw DomainError("link distance must be positive");
    std::vector<double> th(a_d.size());
    for (std::size_t i = 0; i < th.size(); ++i)
        th[i] = std::atan((a_d[i] - b_d[i]) / (d + (a_c[i] - b_c[i])));
    return th;
}

// 2 asin(0.891 / M) for a half-wavelength ULA
inline double beam_width(int m)
{
    if (m < 1)
        throw DomainError("array size must be at least one");
    return 2.0 * std::asin(std::min(1.0, 0.891 / m));
}

inline double max_deflection(int m, double alpha) { return alpha * beam_width(m); }

struct PoleTrajectory {
    std::vector<double> along;  // along-wind displacement, m
    std::vector<double> across; // across-wind displacement, m
};

struct SwaySeries {
    double dt = 0.0;
    std::vector<double> theta;
    PoleTrajectory pole_a, pole_b;
};

inline PoleTrajectory synthesize_pole(const WindEnvironment& env, const PoleDynamics& pole, const SwayConfig& cfg,
                                      Rng& rng)
{
    PoleTrajectory t;
    t.along = synthesize_trajectory([&](double f) { return displacement_psd_along(f, env, pole); }, cfg.sample_rate,
                                    cfg.duration, rng);
    t.across = synthesize_trajectory([&](double f) { return displacement_psd_across(f, env, pole); },
                                     cfg.sample_rate, cfg.duration, rng);
    return t;
}

// Two independently excited poles; displacements are projected onto the link
// normal and the link axis according to the wind angle.
inline SwaySeries simulate_sway(const WindEnvironment& env, const PoleDynamics& pole, const SwayConfig& cfg, Rng& rng)
{
    env.validate();
    pole.validate();
    cfg.validate();
    SwaySeries s;
    s.dt = 1.0 / cfg.sample_rate;
    s.pole_a = synthesize_pole(env, pole, cfg, rng);
    s.pole_b = synthesize_pole(env, pole, cfg, rng);
    const double c = std::cos(cfg.wind_angle), sn = std::sin(cfg.wind_angle);
    auto normal = [&](const PoleTrajectory& p) {
        std::vector<double> v(p.along.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = c * p.along[i] - sn * p.across[i];
        return v;
    };
    auto axial = [&](const PoleTrajectory& p) {
        std::vector<double> v(p.along.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = sn * p.along[i] + c * p.across[i];
        return v;
    };
    s.theta = sway_angle_series(normal(s.pole_a), normal(s.pole_b), axial(s.pole_a), axial(s.pole_b), cfg.distance);
    return s;
}

// Fraction of samples (over time and ensemble) with |theta| > theta_max. The
// standard error is taken across runs, since samples within a run are correlated.
inline ProbabilityEstimate outage_probability(const std::vector<std::vector<double>>& ensemble, double theta_max)
{
    if (ensemble.empty())
        throw DomainError("outage needs at least one sway series");
    std::size_t total = 0, out = 0;
    std::vector<double> per_run;
    per_run.reserve(ensemble.size());
    for (const auto& run : ensemble) {
        std::size_t o = 0;
        for (double th : run)
            o += std::abs(th) > theta_max;
        total += run.size();
        out += o;
        per_run.push_back(run.empty() ? 0.0 : static_cast<double>(o) / static_cast<double>(run.size()));
    }
    if (total == 0)
        throw DomainError("sway series are empty");
    ProbabilityEstimate e;
    e.trials = ensemble.size();
    e.value = static_cast<double>(out) / static_cast<double>(total);
    if (per_run.size() > 1) {
        double m = 0.0, v = 0.0;
        for (double p : per_run)
            m += p;
        m /= static_cast<double>(per_run.size());
        for (double p : per_run)
            v += (p - m) * (p - m);
        v /= static_cast<double>(per_run.size() - 1);
        e.stderr_ = std::sqrt(v / static_cast<double>(per_run.size()));
    }
    return e;
}

struct CoherenceEstimate {
    double mean = 0.0; // s
    double stderr_ = 0.0;
    std::size_t runs = 0;     // runs that started aligned
    std::size_t censored = 0; // no outage within the run
    std::size_t skipped = 0;  // runs not aligned at t = 0
    bool lower_bound = false; // every counted run was censored

    double censored_fraction() const { return runs ? static_cast<double>(censored) / static_cast<double>(runs) : 0.0; }
};

// Mean time to first outage from an aligned start. Runs not aligned at t = 0
// are skipped and counted; censored runs contribute their full duration.
inline CoherenceEstimate coherence_time(const std::vector<std::vector<double>>& ensemble, double theta_max, double dt)
{
    if (ensemble.empty())
        throw DomainError("coherence time needs at least one sway series");
    if (!(dt > 0.0))
        throw DomainError("sample period must be positive");
    CoherenceEstimate e;
    std::vector<double> times;
    for (const auto& run : ensemble) {
        if (run.empty() || std::abs(run.front()) > theta_max) {
            ++e.skipped;
            continue;
        }
        std::size_t n = 1;
        while (n < run.size() && std::abs(run[n]) <= theta_max)
            ++n;
        if (n == run.size()) {
            ++e.censored;
            times.push_back(dt * static_cast<double>(run.size()));
        } else {
            times.push_back(dt * static_cast<double>(n));
        }
    }
    e.runs = times.size();
    if (times.empty()) {
        warn("coherence time: no run started aligned");
        e.mean = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    double m = 0.0;
    for (double t : times)
        m += t;
    m /= static_cast<double>(times.size());
    e.mean = m;
    if (times.size() > 1) {
        double v = 0.0;
        for (double t : times)
            v += (t - m) * (t - m);
        e.stderr_ = std::sqrt(v / static_cast<double>(times.size() - 1) / static_cast<double>(times.size()));
    }
    e.lower_bound = e.censored == e.runs;
    return e;
}

// LOS link whose beams were matched at zero sway. The line between the pole tops
// rotates by theta_L(t), so departure and arrival angles both move by theta_L.
struct SwayLink {
    ArrayGeometry tx, rx;
    double aod = 0.0;
    double aoa = 0.0;
    BeamVector f, z;

    static SwayLink matched(int m, int q, double aod = 0.0, double aoa = 0.0)
    {
        SwayLink l{ArrayGeometry::ula(m), ArrayGeometry::ula(m), aod, aoa, {}, {}};
        l.f = quantize_beam(steering_vector(l.tx, aod), q);
        l.z = quantize_beam(steering_vector(l.rx, aoa), q);
        return l;
    }

    // |z^* a_r(aoa + d_aoa)|^2 |a_t(aod + d_aod)^* f|^2
    double gain(double d_aod, double d_aoa) const
    {
        const double gt = std::norm(f.weights().dot(ula_response(tx.elements_per_axis, tx.spacing, aod + d_aod)));
        const double gr = std::norm(z.weights().dot(ula_response(rx.elements_per_axis, rx.spacing, aoa + d_aoa)));
        return gt * gr;
    }
};

// Loss in dB of one sway state relative to the aligned gain.
inline double sway_gain_penalty(const SwayLink& link, double d_aod, double d_aoa)
{
    const double g0 = link.gain(0.0, 0.0);
    const double g = link.gain(d_aod, d_aoa);
    if (!(g > 0.0))
        return std::numeric_limits<double>::infinity();
    return to_db(g0 / g);
}

struct SwayGainSummary {
    double aligned_db = 0.0;
    double mean_gain_db = 0.0; // 10 log10 of the time/ensemble mean of the linear gain
    double loss_db = 0.0;
    double loss_stderr_db = 0.0;
};

inline SwayGainSummary sway_gain_summary(const SwayLink& link, const std::vector<std::vector<double>>& ensemble)
{
    if (ensemble.empty())
        throw DomainError("gain penalty needs at least one sway series");
    const double g0 = link.gain(0.0, 0.0);
    std::vector<double> run_means;
    for (const auto& run : ensemble) {
        if (run.empty())
            continue;
        double s = 0.0;
        for (double th : run)
            s += link.gain(th, th);
        run_means.push_back(s / static_cast<double>(run.size()));
    }
    if (run_means.empty())
        throw DomainError("sway series are empty");
    double m = 0.0;
    for (double v : run_means)
        m += v;
    m /= static_cast<double>(run_means.size());
    SwayGainSummary r;
    r.aligned_db = to_db(g0);
    r.mean_gain_db = to_db(m);
    r.loss_db = r.aligned_db - r.mean_gain_db;
    if (run_means.size() > 1) {
        double v = 0.0;
        for (double x : run_means)
            v += (x - m) * (x - m);
        const double se = std::sqrt(v / static_cast<double>(run_means.size() - 1) / static_cast<double>(run_means.size()));
        r.loss_stderr_db = 10.0 / std::log(10.0) * se / m;
    }
    return r;
}

inline void write_series(std::ostream& os, const std::vector<double>& v, double dt, const char* name = "value")
{
    os << "t," << name << '\n';
    char buf[80];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", dt * static_cast<double>(i), v[i]);
        os << buf;
    }
}

} // namespace mmwbf

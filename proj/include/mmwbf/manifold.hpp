// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace mmwbf {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double pi = std::numbers::pi;

inline double deg2rad(double d) { return d * pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / pi; }
inline double to_db(double x) { return 10.0 * std::log10(x); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

// Closed angle interval in radians, measured from broadside.
struct Sector {
    double lo = -pi / 2;
    double hi = pi / 2;

    static Sector full() { return {}; }
    double center() const { return 0.5 * (lo + hi); }
    bool contains(double theta, double tol = 1e-12) const { return theta >= lo - tol && theta <= hi + tol; }
};

enum class ArrayKind { Linear, Planar };

struct AnglePair {
    double theta = 0.0;
    double phi = 0.0;
};

// Uniform linear array (M elements) or uniform planar grid (M x M elements).
struct ArrayGeometry {
    ArrayKind kind = ArrayKind::Linear;
    int elements_per_axis = 1;
    double spacing = 0.5; // d / lambda
    Sector sector{};
    Sector sector2{}; // second axis, planar only

    static ArrayGeometry ula(int m, double spacing = 0.5, Sector sector = Sector::full())
    {
        ArrayGeometry g{ArrayKind::Linear, m, spacing, sector, Sector::full()};
        g.validate();
        return g;
    }

    static ArrayGeometry upa(int m, double spacing = 0.5, Sector s1 = Sector::full(), Sector s2 = Sector::full())
    {
        ArrayGeometry g{ArrayKind::Planar, m, spacing, s1, s2};
        g.validate();
        return g;
    }

    int size() const { return kind == ArrayKind::Linear ? elements_per_axis : elements_per_axis * elements_per_axis; }

    // Electrical angle psi = 2 pi (d/lambda) sin(theta).
    double psi(double theta) const { return 2.0 * pi * spacing * std::sin(theta); }
    double psi_lo() const { return psi(sector.lo); }
    double psi_hi() const { return psi(sector.hi); }

    void validate() const
    {
        if (elements_per_axis < 1)
            throw ConfigError("array needs at least one element per axis");
        if (!(spacing > 0.0))
            throw ConfigError("element spacing must be positive");
        auto check = [](const Sector& s) {
            if (!(s.lo <= s.hi) || s.lo < -pi / 2 - 1e-12 || s.hi > pi / 2 + 1e-12)
                throw ConfigError("sector must be a nonempty subinterval of [-pi/2, pi/2]");
        };
        check(sector);
        if (kind == ArrayKind::Planar)
            check(sector2);
    }
};

// Unit-norm beamforming / combining weights. When quantized, entry m equals
// exp(j 2 pi n_m / 2^q) / sqrt(M) with n_0 = 0.
class BeamVector {
  public:
    BeamVector() = default;

    // Unquantized beam; the weights are normalized to unit norm.
    static BeamVector from_weights(const CVector& w)
    {
        const double n = w.norm();
        if (!(n > 0.0) || !std::isfinite(n))
            throw DomainError("beam weights must be a finite nonzero vector");
        BeamVector b;
        b.weights_ = w / n;
        return b;
    }

    static BeamVector from_phase_indices(std::vector<int> indices, int q)
    {
        if (q < 1 || q > 30)
            throw DomainError("phase bits must be in [1, 30]");
        if (indices.empty())
            throw DomainError("beam must have at least one element");
        const int levels = 1 << q;
        const double amp = 1.0 / std::sqrt(static_cast<double>(indices.size()));
        BeamVector b;
        b.weights_.resize(static_cast<Eigen::Index>(indices.size()));
        for (std::size_t m = 0; m < indices.size(); ++m) {
            if (indices[m] < 0 || indices[m] >= levels)
                throw DomainError("phase index outside the 2^q grid");
            b.weights_[static_cast<Eigen::Index>(m)] = phase_point(indices[m], q, amp);
        }
        b.phase_bits_ = q;
        b.indices_ = std::move(indices);
        return b;
    }

    const CVector& weights() const { return weights_; }
    int size() const { return static_cast<int>(weights_.size()); }
    bool quantized() const { return phase_bits_ > 0; }
    int phase_bits() const { return phase_bits_; }
    const std::vector<int>& phase_indices() const { return indices_; }

    cplx operator[](int m) const { return weights_[m]; }

    // |a^* b|^2 between two beams of equal length.
    double overlap(const BeamVector& other) const
    {
        if (other.size() != size())
            throw DomainError("beam length mismatch");
        return std::norm(weights_.dot(other.weights_));
    }

    bool operator==(const BeamVector& o) const
    {
        return phase_bits_ == o.phase_bits_ && indices_ == o.indices_ && weights_ == o.weights_;
    }

    static cplx phase_point(int index, int q, double amp)
    {
        if (index == 0)
            return {amp, 0.0};
        const double ph = 2.0 * pi * static_cast<double>(index) / static_cast<double>(1 << q);
        return {amp * std::cos(ph), amp * std::sin(ph)};
    }

  private:
    CVector weights_;
    int phase_bits_ = 0;
    std::vector<int> indices_;
};

// Per-axis ULA response: entry m = exp(j 2 pi m (d/lambda) sin theta).
inline CVector ula_response(int m_elements, double spacing, double theta)
{
    CVector a(m_elements);
    const double psi = 2.0 * pi * spacing * std::sin(theta);
    for (int m = 0; m < m_elements; ++m)
        a[m] = std::polar(1.0, psi * m);
    return a;
}

// Response on the electrical-angle axis, entry m = exp(j m psi).
inline CVector psi_response(int m_elements, double psi)
{
    CVector a(m_elements);
    for (int m = 0; m < m_elements; ++m)
        a[m] = std::polar(1.0, psi * m);
    return a;
}

inline CVector steering_vector(const ArrayGeometry& geom, double theta)
{
    if (geom.kind != ArrayKind::Linear)
        throw DomainError("planar arrays take an angle pair");
    if (!geom.sector.contains(theta))
        throw DomainError("angle " + std::to_string(theta) + " rad outside the array sector");
    return ula_response(geom.elements_per_axis, geom.spacing, theta);
}

// Planar grid: Kronecker product of the two per-axis responses, first axis major.
inline CVector steering_vector(const ArrayGeometry& geom, AnglePair angle)
{
    if (geom.kind != ArrayKind::Planar)
        throw DomainError("linear arrays take a single angle");
    if (!geom.sector.contains(angle.theta) || !geom.sector2.contains(angle.phi))
        throw DomainError("angle pair outside the array sector");
    const int m = geom.elements_per_axis;
    const CVector a1 = ula_response(m, geom.spacing, angle.theta);
    const CVector a2 = ula_response(m, geom.spacing, angle.phi);
    CVector a(m * m);
    for (int i = 0; i < m; ++i)
        a.segment(i * m, m) = a1[i] * a2;
    return a;
}

// Nearest point of the 2^q phase grid to arg(w_m) - arg(w_0), ties to the
// smaller index; magnitudes become 1/sqrt(M).
inline BeamVector quantize_beam(const CVector& w, int q)
{
    if (q < 1 || q > 30)
        throw DomainError("phase bits must be in [1, 30]");
    if (w.size() == 0 || !(w.norm() > 0.0))
        throw DomainError("cannot quantize a zero vector");
    const int levels = 1 << q;
    const double step = 2.0 * pi / levels;
    const double ref = std::arg(w[0]);
    std::vector<int> idx(static_cast<std::size_t>(w.size()), 0);
    for (Eigen::Index m = 1; m < w.size(); ++m) {
        double rel = std::remainder(std::arg(w[m]) - ref, 2.0 * pi);
        if (rel < 0.0)
            rel += 2.0 * pi;
        const double t = rel / step;
        int n = static_cast<int>(std::ceil(t - 0.5));
        idx[static_cast<std::size_t>(m)] = ((n % levels) + levels) % levels;
    }
    return BeamVector::from_phase_indices(std::move(idx), q);
}

// |w^* a(angle)|^2, in [0, M] for a unit-norm beam.
inline double beam_gain(const BeamVector& w, const ArrayGeometry& geom, double theta)
{
    const CVector a = steering_vector(geom, theta);
    if (a.size() != w.size())
        throw DomainError("beam length does not match the array");
    return std::norm(w.weights().dot(a));
}

inline double beam_gain(const BeamVector& w, const ArrayGeometry& geom, AnglePair angle)
{
    const CVector a = steering_vector(geom, angle);
    if (a.size() != w.size())
        throw DomainError("beam length does not match the array");
    return std::norm(w.weights().dot(a));
}

// Beam pattern on the electrical-angle axis, G_w(psi) = |sum_m conj(w_m) e^{j m psi}|^2.
inline double pattern(const CVector& w, double psi)
{
    cplx acc{0.0, 0.0};
    const cplx step = std::polar(1.0, psi);
    cplx rot{1.0, 0.0};
    for (Eigen::Index m = 0; m < w.size(); ++m) {
        acc += std::conj(w[m]) * rot;
        rot *= step;
        if ((m & 31) == 31) // re-anchor the rotating phasor
            rot = std::polar(1.0, psi * static_cast<double>(m + 1));
    }
    return std::norm(acc);
}

inline double pattern(const BeamVector& w, double psi) { return pattern(w.weights(), psi); }

// (1/2pi) * integral over [-pi, pi) of the beam pattern, uniform trapezoid rule.
// Exact for patterns of degree below the point count.
inline double pattern_integral(const CVector& w, int points = 1 << 14)
{
    double acc = 0.0;
    const double h = 2.0 * pi / points;
    for (int i = 0; i < points; ++i)
        acc += pattern(w, -pi + h * i);
    return acc / points;
}

inline double pattern_integral(const BeamVector& w, int points = 1 << 14) { return pattern_integral(w.weights(), points); }

} // namespace mmwbf

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "manifold.hpp"
#include "random.hpp"

namespace mmwbf {

inline constexpr double speed_of_light = 299792458.0;

struct Path {
    double aod = 0.0;   // rad, transmit local angle
    double aoa = 0.0;   // rad, receive local angle
    double delay = 0.0; // s, excess over the direct path
    double length = 0.0;
    cplx gain{1.0, 0.0};
    bool los = false;
};

using PathSet = std::vector<Path>;

enum class ChannelKind { LosRankOne, RicianMultipath };

struct ChannelMatrix {
    CMatrix h;
    ChannelKind kind = ChannelKind::LosRankOne;
    PathSet paths;

    Eigen::Index rx() const { return h.rows(); }
    Eigen::Index tx() const { return h.cols(); }
};

// H = beta a_r(aoa) a_t(aod)^*
inline ChannelMatrix los_channel(const ArrayGeometry& tx, const ArrayGeometry& rx, double aod, double aoa,
                                 cplx beta = {1.0, 0.0})
{
    ChannelMatrix c;
    c.h = beta * steering_vector(rx, aoa) * steering_vector(tx, aod).adjoint();
    c.kind = ChannelKind::LosRankOne;
    Path p;
    p.aod = aod;
    p.aoa = aoa;
    p.gain = beta;
    p.los = true;
    c.paths.push_back(p);
    return c;
}

inline ChannelMatrix los_channel(const ArrayGeometry& tx, const ArrayGeometry& rx, AnglePair aod, AnglePair aoa,
                                 cplx beta = {1.0, 0.0})
{
    ChannelMatrix c;
    c.h = beta * steering_vector(rx, aoa) * steering_vector(tx, aod).adjoint();
    c.kind = ChannelKind::LosRankOne;
    return c;
}

// Straight street bounded by walls at y = 0 and y = width. The transmitter
// sits at (0, tx_offset) facing +x, the receiver at (distance, rx_offset)
// facing -x; local angles are positive toward +y as seen from broadside.
struct StreetGeometry {
    double width = 20.0;
    double distance = 100.0;
    double tx_offset = 10.0;
    double rx_offset = 10.0;

    void validate() const
    {
        if (!(width > 0.0) || !(distance > 0.0))
            throw DomainError("street width and link distance must be positive");
        if (!(tx_offset > 0.0 && tx_offset < width) || !(rx_offset > 0.0 && rx_offset < width))
            throw DomainError("endpoints must lie strictly inside the street");
    }
};

namespace detail {
// Local angle of direction (vx, vy) relative to boresight (bx, by).
inline double local_angle(double bx, double by, double vx, double vy)
{
    return std::atan2(bx * vy - by * vx, bx * vx + by * vy);
}

inline Path image_path(const StreetGeometry& s, double tx_y_image, double rx_y_image)
{
    Path p;
    // departure toward the receiver image, arrival from the transmitter image
    p.aod = local_angle(1.0, 0.0, s.distance, rx_y_image - s.tx_offset);
    p.aoa = local_angle(-1.0, 0.0, -s.distance, tx_y_image - s.rx_offset);
    p.length = std::hypot(s.distance, rx_y_image - s.tx_offset);
    return p;
}
} // namespace detail

// LOS plus the two single-bounce wall reflections (image method).
inline PathSet street_paths(const StreetGeometry& s)
{
    s.validate();
    PathSet ps;
    Path los = detail::image_path(s, s.tx_offset, s.rx_offset);
    los.los = true;
    ps.push_back(los);
    ps.push_back(detail::image_path(s, -s.tx_offset, -s.rx_offset));
    ps.push_back(detail::image_path(s, 2.0 * s.width - s.tx_offset, 2.0 * s.width - s.rx_offset));
    for (auto& p : ps)
        p.delay = (p.length - los.length) / speed_of_light;
    return ps;
}

inline void write_paths(std::ostream& os, const PathSet& ps)
{
    os << "kind,aod_rad,aoa_rad,length_m,excess_delay_s\n";
    char buf[160];
    for (const auto& p : ps) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g\n", p.los ? "los" : "reflection", p.aod, p.aoa,
                      p.length, p.delay);
        os << buf;
    }
}

// H = sqrt(k/(k+1)) H_LOS + sqrt(1/(k+1)) sum_p (g_p / sqrt(P)) a_r a_t^*,
// g_p ~ CN(0, 1), k = 10^(K/10). Path delays only rotate phases, which the
// random gains already cover.
inline ChannelMatrix rician_channel(const ArrayGeometry& tx, const ArrayGeometry& rx, const PathSet& paths,
                                    double k_factor_db, Rng& rng)
{
    if (std::isnan(k_factor_db))
        throw DomainError("K-factor must not be NaN");
    const Path* los = nullptr;
    std::vector<const Path*> nlos;
    for (const auto& p : paths) {
        if (p.los) {
            if (los)
                throw DomainError("path set must contain exactly one LOS path");
            los = &p;
        } else {
            nlos.push_back(&p);
        }
    }
    if (!los)
        throw DomainError("path set must contain exactly one LOS path");

    ChannelMatrix c;
    c.kind = ChannelKind::RicianMultipath;
    c.paths = paths;
    const CMatrix h_los = steering_vector(rx, los->aoa) * steering_vector(tx, los->aod).adjoint();
    if (nlos.empty() || (std::isinf(k_factor_db) && k_factor_db > 0.0)) {
        c.h = h_los;
        return c;
    }
    const double kappa = from_db(k_factor_db);
    const double w_los = std::sqrt(kappa / (kappa + 1.0));
    const double w_nlos = std::sqrt(1.0 / (kappa + 1.0));
    c.h = w_los * h_los;
    c.paths.front().gain = w_los;
    for (std::size_t i = 0; i < c.paths.size(); ++i) {
        if (c.paths[i].los)
            continue;
        const cplx g = complex_normal(rng) / std::sqrt(static_cast<double>(nlos.size()));
        c.h += (w_nlos * g) * steering_vector(rx, c.paths[i].aoa) * steering_vector(tx, c.paths[i].aod).adjoint();
        c.paths[i].gain = w_nlos * g;
    }
    return c;
}

struct SoundingRecord {
    std::size_t index = 0;
    BeamVector f;
    BeamVector z;
    cplx y{0.0, 0.0};
    bool masked = false;
    // bookkeeping for logs: hierarchy level, swept side and swept beam index
    int level = 0;
    char side = 'J';
    std::size_t beam_index = 0;

    cplx effective() const { return masked ? cplx{0.0, 0.0} : y; }
};

// z^* H f
inline cplx bilinear(const CMatrix& h, const BeamVector& f, const BeamVector& z)
{
    if (h.cols() != f.size() || h.rows() != z.size())
        throw DomainError("beam dimensions do not match the channel");
    return z.weights().dot(h * f.weights());
}

// y = sqrt(rho) z^* H f + v, v ~ CN(0, 1)
inline SoundingRecord sound(const CMatrix& h, const BeamVector& f, const BeamVector& z, double rho, Rng& rng,
                            std::size_t index = 0)
{
    if (!(rho >= 0.0))
        throw DomainError("training SNR must be nonnegative");
    SoundingRecord r;
    r.index = index;
    r.f = f;
    r.z = z;
    r.y = std::sqrt(rho) * bilinear(h, f, z) + complex_normal(rng);
    return r;
}

inline SoundingRecord sound_noiseless(const CMatrix& h, const BeamVector& f, const BeamVector& z, double rho,
                                      std::size_t index = 0)
{
    if (!(rho >= 0.0))
        throw DomainError("training SNR must be nonnegative");
    SoundingRecord r;
    r.index = index;
    r.f = f;
    r.z = z;
    r.y = std::sqrt(rho) * bilinear(h, f, z);
    return r;
}

} // namespace mmwbf

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "errors.hpp"

namespace mmwbf {

// Defaults are the 60 GHz outdoor link of the reference scenario. The carrier
// enters the path-loss formula in MHz.
struct LinkBudget {
    double tx_power_dbm = 15.0;
    double noise_figure_db = 6.0;
    double thermal_noise_dbm_hz = -174.0;
    double bandwidth_hz = 2e9;
    double required_snr_db = 5.0;
    double pathloss_exponent = 2.2;
    double absorption_db_per_km = 20.0;
    double carrier_mhz = 60000.0;

    void validate() const
    {
        if (!(bandwidth_hz > 0.0) || !(carrier_mhz > 0.0) || !(pathloss_exponent > 0.0) || absorption_db_per_km < 0.0)
            throw ConfigError("link budget needs positive bandwidth, carrier and exponent, nonnegative absorption");
    }
};

// PL = 32.5 + 20 log10(f_c[MHz]) + 10 a log10(D[km]) + A_i D[km]
inline double pathloss(double distance_m, double carrier_mhz, double exponent, double absorption_db_per_km)
{
    if (!(distance_m > 0.0))
        throw DomainError("link distance must be positive");
    if (!(carrier_mhz > 0.0))
        throw DomainError("carrier frequency must be positive");
    const double km = distance_m / 1000.0;
    return 32.5 + 20.0 * std::log10(carrier_mhz) + 10.0 * exponent * std::log10(km) + absorption_db_per_km * km;
}

inline double pathloss(double distance_m, const LinkBudget& b)
{
    return pathloss(distance_m, b.carrier_mhz, b.pathloss_exponent, b.absorption_db_per_km);
}

// kT B F in dBm
inline double noise_floor_dbm(const LinkBudget& b)
{
    return b.thermal_noise_dbm_hz + 10.0 * std::log10(b.bandwidth_hz) + b.noise_figure_db;
}

// Total antenna gain needed to reach the required SNR at distance D.
inline double required_gain(double distance_m, const LinkBudget& b)
{
    b.validate();
    return b.required_snr_db + noise_floor_dbm(b) - (b.tx_power_dbm - pathloss(distance_m, b));
}

} // namespace mmwbf

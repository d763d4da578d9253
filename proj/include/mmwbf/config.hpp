// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "errors.hpp"
#include "linkbudget.hpp"
#include "table.hpp"
#include "wind.hpp"

namespace mmwbf {

inline const std::vector<std::string>& experiment_ids()
{
    static const std::vector<std::string> ids{"fig4", "fig6a", "fig6b", "fig8", "fig9",
                                              "fig10", "fig12", "linkbudget", "custom"};
    return ids;
}

struct ExperimentConfig {
    std::string id = "custom";
    std::uint64_t seed = 1;
    std::size_t trials = 2000;
    int threads = 1;

    // arrays and codebooks
    int tx_elements = 32;
    int rx_elements = 32;
    double spacing = 0.5;
    int phase_bits = 5;
    double sector_lo_deg = -90.0;
    double sector_hi_deg = 90.0;
    int grid_factor = 64;          // chi grid points per array element
    double spoil_max_deg = 5.0;
    double spoil_step_deg = 0.02;

    // sweeps
    std::vector<double> snr_db{5.0};
    std::vector<int> budgets{48};
    std::vector<int> joint_budgets{}; // exhaustive joint search; empty reuses budgets
    std::vector<int> elements{32};
    std::vector<double> wind_speeds{13.0};
    std::vector<double> distances{100.0};

    // alignment
    int rounds = 0;                 // 0 picks K from the budget
    std::vector<int> level_sizes{}; // empty derives the sizes from the budget
    double target_gain_db = 26.0;
    double gain_floor_db = -100.0;

    // channel
    std::string channel_model = "rician"; // rician | los
    std::string orientation = "uniform";  // uniform: boresights rotated so the LOS is uniform in psi; facing
    double k_factor_db = 13.2;
    double street_width = 20.0;
    double link_distance = 50.0;
    double lateral_margin = 1.0;
    double los_aod_deg = 10.0;
    double los_aoa_deg = -20.0;
    int codebook_size = 64;
    int closed_form_order = 10;

    // wind
    WindEnvironment wind{};
    PoleDynamics pole{};
    SwayConfig sway{};

    LinkBudget budget{};
    std::vector<double> absorption_db_per_km{20.0, 36.0};

    void validate() const;
};

namespace detail {

template <typename T>
std::string join(const std::vector<T>& v)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            os << ", ";
        if constexpr (std::is_floating_point_v<T>)
            os << format_double(v[i]);
        else
            os << v[i];
    }
    return os.str();
}

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, const std::string& s)
{
    try {
        std::size_t pos = 0;
        const double v = std::stod(trim(s), &pos);
        if (pos != trim(s).size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("'" + key + "': expected a number, got '" + s + "'");
    }
}

inline long long parse_integer(const std::string& key, const std::string& s)
{
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(trim(s), &pos);
        if (pos != trim(s).size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("'" + key + "': expected an integer, got '" + s + "'");
    }
}

// "a, b, c" or "lo:step:hi" (inclusive, tolerant to rounding)
inline std::vector<double> parse_real_list(const std::string& key, const std::string& s)
{
    std::vector<double> out;
    const std::string t = trim(s);
    if (t.empty())
        return out;
    if (t.find(':') != std::string::npos) {
        std::vector<double> p;
        std::stringstream ss(t);
        std::string part;
        while (std::getline(ss, part, ':'))
            p.push_back(parse_real(key, part));
        if (p.size() != 3 || !(p[1] > 0.0) || p[2] < p[0])
            throw ConfigError("'" + key + "': range must be lo:step:hi with step > 0 and hi >= lo");
        const long n = static_cast<long>(std::floor((p[2] - p[0]) / p[1] + 1e-9));
        for (long i = 0; i <= n; ++i)
            out.push_back(p[0] + static_cast<double>(i) * p[1]);
        return out;
    }
    std::stringstream ss(t);
    std::string part;
    while (std::getline(ss, part, ','))
        out.push_back(parse_real(key, part));
    return out;
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& s)
{
    std::vector<int> out;
    for (double v : parse_real_list(key, s)) {
        if (v != std::floor(v))
            throw ConfigError("'" + key + "': expected integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& s)
{
    const std::string t = trim(s);
    if (t == "true" || t == "1" || t == "yes")
        return true;
    if (t == "false" || t == "0" || t == "no")
        return false;
    throw ConfigError("'" + key + "': expected true or false");
}

} // namespace detail

// Defaults for each experiment id, before any file or flag overrides.
inline ExperimentConfig default_config(const std::string& id)
{
    const auto& ids = experiment_ids();
    if (std::find(ids.begin(), ids.end(), id) == ids.end())
        throw ConfigError("unknown experiment id '" + id + "'");
    ExperimentConfig c;
    c.id = id;
    if (id == "fig4") {
        c.trials = 100000;
        c.snr_db = detail::parse_real_list("snr_db", "-21:3:6");
        c.channel_model = "los";
        c.elements = {32};
    } else if (id == "fig6a" || id == "fig6b" || id == "fig12") {
        c.trials = 200;
        c.elements = {16, 32, 64, 96};
        c.wind_speeds = detail::parse_real_list("wind_speeds", "5:5:40");
    } else if (id == "fig8") {
        c.snr_db = detail::parse_real_list("snr_db", "-10:2.5:20");
        c.budgets = {48};
        c.rounds = 3;
        c.level_sizes = {8, 32, 64};
    } else if (id == "fig9") {
        c.snr_db = {5.0};
        c.budgets = {8, 12, 16, 20, 24, 28, 32, 36, 40, 42, 44, 48, 52, 56, 60, 64, 72, 84, 96, 128, 160, 192};
        c.joint_budgets = {16, 36, 64, 100, 144, 196, 256, 324, 400, 484, 576, 676, 784, 900, 1024};
    } else if (id == "fig10") {
        c.snr_db = {5.0};
        c.elements = {16, 24, 32, 48, 64, 96};
    } else if (id == "linkbudget") {
        c.distances = detail::parse_real_list("distances", "10:10:300");
    }
    return c;
}

// Applies every key present in `pt`; unknown keys are rejected.
inline void apply_ptree(ExperimentConfig& c, const boost::property_tree::ptree& pt)
{
    using detail::parse_int_list;
    using detail::parse_integer;
    using detail::parse_real;
    using detail::parse_real_list;
    for (const auto& [section, body] : pt) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("key '" + section + "' must be inside a section");
        for (const auto& [k, node] : body) {
            const std::string key = section + "." + k;
            const std::string v = node.data();
            auto real = [&]() { return parse_real(key, v); };
            auto integer = [&]() { return parse_integer(key, v); };
            auto positive_int = [&]() {
                const long long x = integer();
                if (x < 0)
                    throw ConfigError("'" + key + "' must be nonnegative");
                return x;
            };
            if (key == "experiment.id") {
                c.id = detail::trim(v);
            } else if (key == "experiment.seed") {
                c.seed = static_cast<std::uint64_t>(positive_int());
            } else if (key == "experiment.trials") {
                c.trials = static_cast<std::size_t>(positive_int());
            } else if (key == "experiment.threads") {
                c.threads = static_cast<int>(positive_int());
            } else if (key == "array.tx_elements") {
                c.tx_elements = static_cast<int>(integer());
            } else if (key == "array.rx_elements") {
                c.rx_elements = static_cast<int>(integer());
            } else if (key == "array.spacing") {
                c.spacing = real();
            } else if (key == "array.phase_bits") {
                c.phase_bits = static_cast<int>(integer());
            } else if (key == "array.sector_lo_deg") {
                c.sector_lo_deg = real();
            } else if (key == "array.sector_hi_deg") {
                c.sector_hi_deg = real();
            } else if (key == "codebook.grid_factor") {
                c.grid_factor = static_cast<int>(integer());
            } else if (key == "codebook.spoil_max_deg") {
                c.spoil_max_deg = real();
            } else if (key == "codebook.spoil_step_deg") {
                c.spoil_step_deg = real();
            } else if (key == "codebook.size") {
                c.codebook_size = static_cast<int>(integer());
            } else if (key == "sweep.snr_db") {
                c.snr_db = parse_real_list(key, v);
            } else if (key == "sweep.budgets") {
                c.budgets = parse_int_list(key, v);
            } else if (key == "sweep.joint_budgets") {
                c.joint_budgets = parse_int_list(key, v);
            } else if (key == "sweep.elements") {
                c.elements = parse_int_list(key, v);
            } else if (key == "sweep.wind_speeds") {
                c.wind_speeds = parse_real_list(key, v);
            } else if (key == "sweep.distances") {
                c.distances = parse_real_list(key, v);
            } else if (key == "alignment.rounds") {
                c.rounds = static_cast<int>(positive_int());
            } else if (key == "alignment.level_sizes") {
                c.level_sizes = parse_int_list(key, v);
            } else if (key == "alignment.target_gain_db") {
                c.target_gain_db = real();
            } else if (key == "alignment.gain_floor_db") {
                c.gain_floor_db = real();
            } else if (key == "channel.model") {
                c.channel_model = detail::trim(v);
            } else if (key == "channel.orientation") {
                c.orientation = detail::trim(v);
            } else if (key == "channel.k_factor_db") {
                c.k_factor_db = real();
            } else if (key == "channel.street_width") {
                c.street_width = real();
            } else if (key == "channel.link_distance") {
                c.link_distance = real();
            } else if (key == "channel.lateral_margin") {
                c.lateral_margin = real();
            } else if (key == "channel.los_aod_deg") {
                c.los_aod_deg = real();
            } else if (key == "channel.los_aoa_deg") {
                c.los_aoa_deg = real();
            } else if (key == "analysis.closed_form_order") {
                c.closed_form_order = static_cast<int>(integer());
            } else if (key == "wind.air_density") {
                c.wind.air_density = real();
            } else if (key == "wind.drag_coefficient") {
                c.wind.drag_coefficient = real();
            } else if (key == "wind.effective_area") {
                c.wind.effective_area = real();
            } else if (key == "wind.roughness") {
                c.wind.roughness = real();
            } else if (key == "wind.pole_diameter") {
                c.wind.pole_diameter = real();
            } else if (key == "wind.strouhal") {
                c.wind.strouhal = real();
            } else if (key == "wind.vortex_frequency_override") {
                c.wind.vortex_frequency_override = real();
            } else if (key == "wind.vortex_shedding") {
                c.wind.vortex_shedding = detail::parse_bool(key, v);
            } else if (key == "wind.natural_frequency") {
                c.pole.natural_frequency = real();
            } else if (key == "wind.damping") {
                c.pole.damping = real();
            } else if (key == "wind.mass") {
                c.pole.mass = real();
            } else if (key == "wind.link_distance") {
                c.sway.distance = real();
            } else if (key == "wind.alpha") {
                c.sway.alpha = real();
            } else if (key == "wind.sample_rate") {
                c.sway.sample_rate = real();
            } else if (key == "wind.duration") {
                c.sway.duration = real();
            } else if (key == "wind.wind_angle_deg") {
                c.sway.wind_angle = deg2rad(real());
            } else if (key == "linkbudget.tx_power_dbm") {
                c.budget.tx_power_dbm = real();
            } else if (key == "linkbudget.noise_figure_db") {
                c.budget.noise_figure_db = real();
            } else if (key == "linkbudget.thermal_noise_dbm_hz") {
                c.budget.thermal_noise_dbm_hz = real();
            } else if (key == "linkbudget.bandwidth_hz") {
                c.budget.bandwidth_hz = real();
            } else if (key == "linkbudget.required_snr_db") {
                c.budget.required_snr_db = real();
            } else if (key == "linkbudget.pathloss_exponent") {
                c.budget.pathloss_exponent = real();
            } else if (key == "linkbudget.carrier_mhz") {
                c.budget.carrier_mhz = real();
            } else if (key == "linkbudget.absorption_db_per_km") {
                c.absorption_db_per_km = parse_real_list(key, v);
            } else {
                throw ConfigError("unknown configuration key '" + key + "'");
            }
        }
    }
}

// Canonical INI text; loading it reproduces the configuration exactly.
inline std::string to_ini(const ExperimentConfig& c)
{
    using detail::format_double;
    using detail::join;
    std::ostringstream os;
    auto r = [&](const char* k, double v) { os << k << " = " << format_double(v) << '\n'; };
    os << "[experiment]\n";
    os << "id = " << c.id << '\n' << "seed = " << c.seed << '\n' << "trials = " << c.trials << '\n';
    os << "threads = " << c.threads << '\n';
    os << "[array]\n";
    os << "tx_elements = " << c.tx_elements << '\n' << "rx_elements = " << c.rx_elements << '\n';
    r("spacing", c.spacing);
    os << "phase_bits = " << c.phase_bits << '\n';
    r("sector_lo_deg", c.sector_lo_deg);
    r("sector_hi_deg", c.sector_hi_deg);
    os << "[codebook]\n";
    os << "grid_factor = " << c.grid_factor << '\n';
    r("spoil_max_deg", c.spoil_max_deg);
    r("spoil_step_deg", c.spoil_step_deg);
    os << "size = " << c.codebook_size << '\n';
    os << "[sweep]\n";
    os << "snr_db = " << join(c.snr_db) << '\n' << "budgets = " << join(c.budgets) << '\n'
       << "joint_budgets = " << join(c.joint_budgets) << '\n';
    os << "elements = " << join(c.elements) << '\n' << "wind_speeds = " << join(c.wind_speeds) << '\n';
    os << "distances = " << join(c.distances) << '\n';
    os << "[alignment]\n";
    os << "rounds = " << c.rounds << '\n' << "level_sizes = " << join(c.level_sizes) << '\n';
    r("target_gain_db", c.target_gain_db);
    r("gain_floor_db", c.gain_floor_db);
    os << "[channel]\n";
    os << "model = " << c.channel_model << '\n';
    os << "orientation = " << c.orientation << '\n';
    r("k_factor_db", c.k_factor_db);
    r("street_width", c.street_width);
    r("link_distance", c.link_distance);
    r("lateral_margin", c.lateral_margin);
    r("los_aod_deg", c.los_aod_deg);
    r("los_aoa_deg", c.los_aoa_deg);
    os << "[analysis]\n";
    os << "closed_form_order = " << c.closed_form_order << '\n';
    os << "[wind]\n";
    r("air_density", c.wind.air_density);
    r("drag_coefficient", c.wind.drag_coefficient);
    r("effective_area", c.wind.effective_area);
    r("roughness", c.wind.roughness);
    r("pole_diameter", c.wind.pole_diameter);
    r("strouhal", c.wind.strouhal);
    r("vortex_frequency_override", c.wind.vortex_frequency_override);
    os << "vortex_shedding = " << (c.wind.vortex_shedding ? "true" : "false") << '\n';
    r("natural_frequency", c.pole.natural_frequency);
    r("damping", c.pole.damping);
    r("mass", c.pole.mass);
    r("link_distance", c.sway.distance);
    r("alpha", c.sway.alpha);
    r("sample_rate", c.sway.sample_rate);
    r("duration", c.sway.duration);
    r("wind_angle_deg", rad2deg(c.sway.wind_angle));
    os << "[linkbudget]\n";
    r("tx_power_dbm", c.budget.tx_power_dbm);
    r("noise_figure_db", c.budget.noise_figure_db);
    r("thermal_noise_dbm_hz", c.budget.thermal_noise_dbm_hz);
    r("bandwidth_hz", c.budget.bandwidth_hz);
    r("required_snr_db", c.budget.required_snr_db);
    r("pathloss_exponent", c.budget.pathloss_exponent);
    r("carrier_mhz", c.budget.carrier_mhz);
    os << "absorption_db_per_km = " << join(c.absorption_db_per_km) << '\n';
    return os.str();
}

inline boost::property_tree::ptree parse_ini_text(const std::string& text)
{
    boost::property_tree::ptree pt;
    std::istringstream is(text);
    try {
        boost::property_tree::ini_parser::read_ini(is, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    return pt;
}

// Reads an INI file, or a result CSV whose "# config:" metadata embeds one.
inline std::string read_config_text(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot read configuration '" + path + "'");
    std::ostringstream all;
    all << is.rdbuf();
    const std::string text = all.str();
    if (text.rfind("# ", 0) == 0) {
        std::istringstream ts(text);
        const Table t = read_csv(ts);
        for (const auto& [k, v] : t.meta)
            if (k == "config")
                return v;
        throw ConfigError("'" + path + "' has no embedded configuration");
    }
    return text;
}

// Experiment id from the text: its [experiment] id key, else `fallback`.
inline std::string config_id(const std::string& text, const std::string& fallback)
{
    const auto pt = parse_ini_text(text);
    return pt.get<std::string>("experiment.id", fallback);
}

inline ExperimentConfig load_config(const std::string& text, const std::string& id)
{
    ExperimentConfig c = default_config(id);
    apply_ptree(c, parse_ini_text(text));
    if (c.id != id)
        throw ConfigError("configuration is for experiment '" + c.id + "', not '" + id + "'");
    c.validate();
    return c;
}

inline void ExperimentConfig::validate() const
{
    const auto& ids = experiment_ids();
    if (std::find(ids.begin(), ids.end(), id) == ids.end())
        throw ConfigError("unknown experiment id '" + id + "'");
    if (trials < 1)
        throw ConfigError("trial count must be at least one");
    if (threads < 0)
        throw ConfigError("thread count must be nonnegative");
    if (tx_elements < 1 || rx_elements < 1)
        throw ConfigError("array sizes must be positive");
    if (!(spacing > 0.0))
        throw ConfigError("element spacing must be positive");
    if (phase_bits < 1 || phase_bits > 16)
        throw ConfigError("phase bits must be in [1, 16]");
    if (!(sector_lo_deg <= sector_hi_deg) || sector_lo_deg < -90.0 || sector_hi_deg > 90.0)
        throw ConfigError("sector must be a subinterval of [-90, 90] degrees");
    if (grid_factor < 4)
        throw ConfigError("grid factor must be at least 4");
    if (!(spoil_max_deg >= 0.0) || !(spoil_step_deg > 0.0))
        throw ConfigError("spoil grid needs max >= 0 and step > 0");
    if (snr_db.empty() || budgets.empty() || elements.empty() || wind_speeds.empty() || distances.empty())
        throw ConfigError("sweeps must be nonempty");
    for (int b : budgets)
        if (b < 2)
            throw ConfigError("sounding budgets must be at least 2");
    for (int b : joint_budgets)
        if (b < 1)
            throw ConfigError("joint sounding budgets must be positive");
    for (int m : elements)
        if (m < 1)
            throw ConfigError("swept array sizes must be positive");
    for (double u : wind_speeds)
        if (!(u > 0.0))
            throw ConfigError("wind speeds must be positive");
    for (double d : distances)
        if (!(d > 0.0))
            throw ConfigError("distances must be positive");
    if (channel_model != "rician" && channel_model != "los")
        throw ConfigError("channel model must be 'rician' or 'los'");
    if (orientation != "uniform" && orientation != "facing")
        throw ConfigError("channel orientation must be 'uniform' or 'facing'");
    if (!(street_width > 0.0) || !(link_distance > 0.0) || lateral_margin < 0.0 ||
        !(2.0 * lateral_margin < street_width))
        throw ConfigError("street geometry needs positive width and distance, margin below half the width");
    if (codebook_size < 1)
        throw ConfigError("codebook size must be positive");
    if (closed_form_order < 1)
        throw ConfigError("closed-form order must be at least one");
    if (absorption_db_per_km.empty())
        throw ConfigError("absorption list must be nonempty");
    WindEnvironment w = wind;
    w.mean_speed = 1.0;
    w.validate();
    pole.validate();
    SwayConfig s = sway;
    s.elements = 1;
    s.validate();
    LinkBudget b = budget;
    for (double a : absorption_db_per_km) {
        b.absorption_db_per_km = a;
        b.validate();
    }
}

} // namespace mmwbf

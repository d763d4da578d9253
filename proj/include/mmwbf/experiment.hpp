// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "alignment.hpp"
#include "analysis.hpp"
#include "channel.hpp"
#include "codebook.hpp"
#include "config.hpp"
#include "linkbudget.hpp"
#include "parallel.hpp"
#include "table.hpp"
#include "wind.hpp"

#ifndef MMWBF_GIT_DESCRIBE
#define MMWBF_GIT_DESCRIBE "unknown"
#endif

namespace mmwbf {

inline const char* git_describe() { return MMWBF_GIT_DESCRIBE; }

// ---------------------------------------------------------------------------
// Level sizes for a sounding budget

struct HierarchyPlan {
    std::size_t rounds = 0;   // K
    std::size_t per_round = 0; // L_K
    std::vector<std::size_t> sizes;

    std::size_t budget() const { return 2 * rounds * per_round; }
};

// K = 2 below 36 soundings, 3 below 96, 4 beyond.
inline std::size_t default_rounds(std::size_t budget)
{
    if (budget < 36)
        return 2;
    if (budget < 96)
        return 3;
    return 4;
}

// N_1 = L_K and N_K = min(L_K^K, max(2M, 4 L_K)); intermediate levels halve
// downward from N_K, or are spaced geometrically when halving would not stay
// strictly increasing.
inline std::vector<std::size_t> plan_level_sizes(std::size_t rounds, std::size_t per_round, int m)
{
    if (rounds < 1 || per_round < 1)
        throw ConfigError("hierarchy needs K >= 1 and L_K >= 1");
    std::vector<std::size_t> cap(rounds);
    double c = 1.0;
    for (std::size_t k = 0; k < rounds; ++k) {
        c *= static_cast<double>(per_round);
        cap[k] = static_cast<std::size_t>(std::min(c, 1e15));
    }
    std::vector<std::size_t> n(rounds);
    n[0] = per_round;
    if (rounds == 1)
        return n;
    const std::size_t nk = std::min(cap.back(), std::max<std::size_t>(2 * static_cast<std::size_t>(m), 4 * per_round));
    n.back() = nk;
    bool ok = true;
    for (std::size_t k = 1; k + 1 < rounds; ++k) {
        n[k] = std::min(cap[k], nk >> (rounds - 1 - k));
        if (n[k] <= n[k - 1])
            ok = false;
    }
    if (!ok) {
        const double r = std::pow(static_cast<double>(nk) / static_cast<double>(per_round), 1.0 / (rounds - 1.0));
        for (std::size_t k = 1; k + 1 < rounds; ++k)
            n[k] = std::min(cap[k], std::max(n[k - 1] + 1,
                                             static_cast<std::size_t>(std::llround(per_round * std::pow(r, k)))));
    }
    for (std::size_t k = 1; k < rounds; ++k)
        if (n[k] <= n[k - 1])
            throw ConfigError("cannot build strictly increasing level sizes for K = " + std::to_string(rounds) +
                              ", L_K = " + std::to_string(per_round));
    return n;
}

inline HierarchyPlan plan_hierarchy(std::size_t budget, int m, std::size_t rounds = 0,
                                     const std::vector<int>& sizes = {})
{
    HierarchyPlan p;
    p.rounds = rounds ? rounds : default_rounds(budget);
    if (budget % (2 * p.rounds) != 0)
        throw ConfigError("budget " + std::to_string(budget) + " is not a multiple of 2K = " +
                          std::to_string(2 * p.rounds));
    p.per_round = budget / (2 * p.rounds);
    if (!sizes.empty()) {
        if (sizes.size() != p.rounds)
            throw ConfigError("level_sizes must list K sizes");
        for (int s : sizes)
            p.sizes.push_back(static_cast<std::size_t>(s));
    } else {
        p.sizes = plan_level_sizes(p.rounds, p.per_round, m);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Offline codebook design, memoized per process

struct DesignSettings {
    int q = 5;
    int grid_factor = 64;
    double spoil_max_deg = 5.0;
    double spoil_step_deg = 0.02;

    DesignGrid grid(int m) const
    {
        DesignGrid g = DesignGrid::defaults(m);
        g.spoil_angles.clear();
        const long steps = static_cast<long>(std::floor(spoil_max_deg / spoil_step_deg + 1e-9));
        for (long i = 0; i <= steps; ++i)
            g.spoil_angles.push_back(deg2rad(spoil_step_deg * static_cast<double>(i)));
        return g;
    }
};

class DesignCache {
  public:
    static DesignCache& instance()
    {
        static DesignCache c;
        return c;
    }

    Codebook level(const ArrayGeometry& geom, std::size_t n, const DesignSettings& s)
    {
        std::ostringstream key;
        key << geom.elements_per_axis << '/' << n << '/' << s.q << '/' << s.grid_factor << '/' << s.spoil_max_deg << '/'
            << s.spoil_step_deg << '/' << geom.spacing << '/' << geom.sector.lo << '/' << geom.sector.hi;
        std::unique_lock<std::mutex> lock(mutex_);
        auto it = cache_.find(key.str());
        if (it != cache_.end())
            return it->second;
        lock.unlock();
        Codebook cb = design_subcodebook(geom, n, s.q, s.grid(geom.elements_per_axis),
                                         s.grid_factor * geom.elements_per_axis)
                          .codebook;
        lock.lock();
        return cache_.emplace(key.str(), std::move(cb)).first->second;
    }

    HierarchicalCodebook hierarchy(const ArrayGeometry& geom, const HierarchyPlan& plan, const DesignSettings& s)
    {
        return build_hierarchy_with(geom, plan.sizes, s.q, plan.per_round,
                                    [&](const ArrayGeometry& g, std::size_t n, int) { return level(g, n, s); });
    }

    void clear()
    {
        std::lock_guard<std::mutex> lock(mutex_);
        cache_.clear();
    }

  private:
    std::mutex mutex_;
    std::map<std::string, Codebook> cache_;
};

// ---------------------------------------------------------------------------
// Monte Carlo gain sweeps

enum class Strategy { Adaptive, SingleSided, Joint };

inline const char* strategy_name(Strategy s)
{
    switch (s) {
    case Strategy::Adaptive:
        return "adaptive";
    case Strategy::SingleSided:
        return "single_sided";
    case Strategy::Joint:
        return "joint";
    }
    return "?";
}

struct GainEstimate {
    double mean_db = 0.0;   // 10 log10 of the mean linear gain
    double stderr_db = 0.0; // delta method
    double mean_linear = 0.0;
    std::size_t soundings = 0;
    std::size_t trials = 0;
};

inline GainEstimate summarize_gains(const std::vector<double>& g, std::size_t soundings)
{
    GainEstimate e;
    e.trials = g.size();
    e.soundings = soundings;
    double m = 0.0;
    for (double x : g)
        m += x;
    m /= static_cast<double>(g.size());
    double v = 0.0;
    for (double x : g)
        v += (x - m) * (x - m);
    e.mean_linear = m;
    e.mean_db = m > 0.0 ? to_db(m) : -std::numeric_limits<double>::infinity();
    if (g.size() > 1 && m > 0.0)
        e.stderr_db = 10.0 / std::log(10.0) * std::sqrt(v / static_cast<double>(g.size() - 1) /
                                                         static_cast<double>(g.size())) / m;
    return e;
}

// Channel of one trial: street geometry with lateral endpoint offsets drawn
// uniformly inside the margins.
inline CMatrix draw_channel(const ExperimentConfig& c, const ArrayGeometry& tx, const ArrayGeometry& rx, Rng& rng)
{
    StreetGeometry s;
    s.width = c.street_width;
    s.distance = c.link_distance;
    s.tx_offset = uniform(rng, c.lateral_margin, c.street_width - c.lateral_margin);
    s.rx_offset = uniform(rng, c.lateral_margin, c.street_width - c.lateral_margin);
    PathSet paths = street_paths(s);
    if (c.orientation == "uniform") {
        // Rotate each boresight so the LOS lands uniformly in psi over the
        // sector; angles behind the aperture fold onto their front-side twin,
        // which has the same ULA response.
        const auto fold = [](double a) { return std::asin(std::clamp(std::sin(a), -1.0, 1.0)); };
        const auto draw = [&](const ArrayGeometry& g) {
            return std::asin(uniform(rng, std::sin(g.sector.lo), std::sin(g.sector.hi)));
        };
        const double rot_t = draw(tx) - paths.front().aod;
        const double rot_r = draw(rx) - paths.front().aoa;
        for (Path& p : paths) {
            p.aod = std::clamp(fold(p.aod + rot_t), tx.sector.lo, tx.sector.hi);
            p.aoa = std::clamp(fold(p.aoa + rot_r), rx.sector.lo, rx.sector.hi);
        }
    }
    if (c.channel_model == "los")
        return los_channel(tx, rx, paths.front().aod, paths.front().aoa).h;
    return rician_channel(tx, rx, paths, c.k_factor_db, rng).h;
}

struct StrategySetup {
    Strategy strategy;
    std::size_t budget = 0; // requested L
    std::optional<HierarchicalCodebook> hf, hz;
    PingPongSchedule schedule{};
    Codebook f, z;
    BeamVector fixed_combiner;
    std::size_t soundings = 0; // actual L
};

inline ArrayGeometry config_array(const ExperimentConfig& c, int m)
{
    return ArrayGeometry::ula(m, c.spacing, {deg2rad(c.sector_lo_deg), deg2rad(c.sector_hi_deg)});
}

inline DesignSettings design_settings(const ExperimentConfig& c)
{
    return {c.phase_bits, c.grid_factor, c.spoil_max_deg, c.spoil_step_deg};
}

// Fixed combiner of the one-sided sweep: level-1 beam shape (for the budget's
// L_K) centered in the sector.
inline BeamVector fixed_combiner_for(const ExperimentConfig& c, const ArrayGeometry& rx, std::size_t budget)
{
    const std::size_t k = c.rounds > 0 ? static_cast<std::size_t>(c.rounds) : default_rounds(budget);
    const std::size_t n1 = std::max<std::size_t>(1, budget / (2 * k));
    const Codebook l1 = DesignCache::instance().level(rx, n1, design_settings(c));
    return broadened_beam({l1.n_subarrays, l1.spoil_angle, rx.sector.center(), l1.q}, rx);
}

inline StrategySetup setup_strategy(const ExperimentConfig& c, Strategy s, int m, std::size_t budget,
                                    std::optional<std::size_t> per_round = std::nullopt)
{
    const ArrayGeometry tx = config_array(c, m), rx = config_array(c, m);
    StrategySetup st{s, budget, std::nullopt, std::nullopt, {}, {}, {}, {}, 0};
    switch (s) {
    case Strategy::Adaptive: {
        HierarchyPlan plan;
        if (per_round) {
            plan.rounds = c.rounds > 0 ? static_cast<std::size_t>(c.rounds) : default_rounds(budget);
            plan.per_round = *per_round;
            plan.sizes = plan_level_sizes(plan.rounds, plan.per_round, m);
        } else {
            plan = plan_hierarchy(budget, m, static_cast<std::size_t>(std::max(0, c.rounds)), c.level_sizes);
        }
        st.hf = DesignCache::instance().hierarchy(tx, plan, design_settings(c));
        st.hz = DesignCache::instance().hierarchy(rx, plan, design_settings(c));
        st.schedule = {plan.rounds, plan.per_round, initial_beam(*st.hz)};
        st.soundings = plan.budget();
        break;
    }
    case Strategy::SingleSided: {
        const std::size_t half = budget / 2;
        if (half < 1)
            throw ConfigError("single-sided search needs a budget of at least 2");
        st.f = uniform_codebook(tx, half, c.phase_bits);
        st.z = uniform_codebook(rx, half, c.phase_bits);
        st.fixed_combiner = fixed_combiner_for(c, rx, budget);
        st.soundings = 2 * half;
        break;
    }
    case Strategy::Joint: {
        const std::size_t n =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(budget)))));
        st.f = uniform_codebook(tx, n, c.phase_bits);
        st.z = uniform_codebook(rx, n, c.phase_bits);
        st.soundings = n * n;
        break;
    }
    }
    return st;
}

inline AlignmentResult run_strategy(const StrategySetup& st, const CMatrix& h, double rho, Rng& rng,
                                    const AlignmentOptions& opt = {})
{
    switch (st.strategy) {
    case Strategy::Adaptive:
        return ping_pong_hierarchical(h, *st.hf, *st.hz, st.schedule, rho, rng, opt);
    case Strategy::SingleSided:
        return single_sided(h, st.f, st.z, st.fixed_combiner, rho, rng, opt);
    case Strategy::Joint:
        return exhaustive_joint(h, st.f, st.z, rho, rng, opt);
    }
    throw DomainError("unknown strategy");
}

// Mean beamforming gain of several strategies over `trials` channel draws.
// Trial t of sweep point p draws from make_stream(seed, p * trials + t); all
// strategies see the same channel.
inline std::vector<GainEstimate> gain_point(const ExperimentConfig& c, const std::vector<StrategySetup>& setups, int m,
                                            double snr_db, std::size_t point)
{
    const ArrayGeometry tx = config_array(c, m), rx = config_array(c, m);
    const double rho = from_db(snr_db);
    std::vector<std::vector<double>> gains(setups.size(), std::vector<double>(c.trials));
    parallel_for(c.trials, c.threads, [&](std::size_t t) {
        Rng rng = make_stream(c.seed, point * c.trials + t);
        const CMatrix h = draw_channel(c, tx, rx, rng);
        for (std::size_t s = 0; s < setups.size(); ++s) {
            const AlignmentResult r = run_strategy(setups[s], h, rho, rng);
            gains[s][t] = gain_linear(h, r.f_opt, r.z_opt);
        }
    });
    std::vector<GainEstimate> out;
    for (std::size_t s = 0; s < setups.size(); ++s)
        out.push_back(summarize_gains(gains[s], setups[s].soundings));
    return out;
}

// ---------------------------------------------------------------------------
// Output tables

struct NamedTable {
    std::string name; // file stem
    Table table;
};

inline Table new_table(const ExperimentConfig& c, std::vector<std::string> columns)
{
    Table t;
    t.add_meta("experiment", c.id);
    t.add_meta("seed", std::to_string(c.seed));
    t.add_meta("trials", std::to_string(c.trials));
    t.add_meta("git", git_describe());
    t.add_meta("config", to_ini(c));
    t.columns = std::move(columns);
    return t;
}

inline std::vector<std::string> gain_columns()
{
    return {"sweep_index", "elements", "snr_db", "budget", "strategy", "soundings", "gain_db", "gain_stderr_db", "cap_db"};
}

inline void add_gain_row(Table& t, std::size_t point, int m, double snr, std::size_t budget, Strategy s,
                         const GainEstimate& g)
{
    t.add_row({static_cast<long long>(point), static_cast<long long>(m), snr, static_cast<long long>(budget),
               std::string(strategy_name(s)), static_cast<long long>(g.soundings), g.mean_db, g.stderr_db,
               to_db(static_cast<double>(m) * m)});
}

namespace detail {
inline std::vector<Strategy> all_strategies() { return {Strategy::Adaptive, Strategy::SingleSided, Strategy::Joint}; }

inline bool adaptive_budget_ok(const ExperimentConfig& c, std::size_t budget)
{
    const std::size_t k = c.rounds > 0 ? static_cast<std::size_t>(c.rounds) : default_rounds(budget);
    return budget % (2 * k) == 0;
}
} // namespace detail

inline std::vector<NamedTable> run_fig4(const ExperimentConfig& c)
{
    const int m = c.elements.front();
    const ArrayGeometry g = config_array(c, m);
    const Codebook f = uniform_codebook(g, static_cast<std::size_t>(c.codebook_size), c.phase_bits);
    const Codebook z = uniform_codebook(g, static_cast<std::size_t>(c.codebook_size), c.phase_bits);
    const CMatrix h = los_channel(g, g, deg2rad(c.los_aod_deg), deg2rad(c.los_aoa_deg)).h;
    const std::vector<double> gam = sounding_magnitudes(h, f, z);

    Table t = new_table(c, {"snr_db", "pmis_mc", "pmis_stderr", "ub", "lb", "asym16", "asym18"});
    Table p = new_table(c, {"snr_db", "gamma_opt", "gamma_alt", "exact", "closed_form", "asym16", "asym18"});
    const std::size_t opt = detail::argmax_lowest(gam);
    std::size_t alt = opt == 0 ? 1 : 0;
    for (std::size_t l = 0; l < gam.size(); ++l)
        if (l != opt && gam[l] > gam[alt])
            alt = l;
    for (std::size_t i = 0; i < c.snr_db.size(); ++i) {
        const double rho = from_db(c.snr_db[i]);
        const MisalignmentBounds b = misalignment_bounds(gam, rho);
        double a16 = 0.0, a18 = 0.0;
        for (std::size_t l = 0; l < gam.size(); ++l) {
            if (l == opt || !(gam[l] > 0.0) || !(gam[l] < gam[opt]))
                continue;
            a16 += pairwise_asymptotic_erfc({gam[opt], gam[l], rho});
            a18 += pairwise_asymptotic_exp({gam[opt], gam[l], rho});
        }
        const ProbabilityEstimate mc = monte_carlo_pmis(h, f, z, rho, c.trials, c.seed + i, c.threads);
        t.add_row({c.snr_db[i], mc.value, mc.stderr_, b.upper, b.lower, std::min(a16, 1.0), std::min(a18, 1.0)});
        const PairwiseGains pg{gam[opt], gam[alt], rho};
        p.add_row({c.snr_db[i], gam[opt], gam[alt], pairwise_exact(pg), pairwise_closed_form(pg, c.closed_form_order),
                   pairwise_asymptotic_erfc(pg), pairwise_asymptotic_exp(pg)});
    }
    return {{"fig4", std::move(t)}, {"fig4_pairwise", std::move(p)}};
}

// Sway-angle ensembles per wind speed; run r at speed index u uses make_stream(seed, u * trials + r).
inline std::vector<std::vector<double>> sway_ensemble(const ExperimentConfig& c, double speed, std::size_t u)
{
    WindEnvironment env = c.wind;
    env.mean_speed = speed;
    std::vector<std::vector<double>> runs(c.trials);
    parallel_for(c.trials, c.threads, [&](std::size_t r) {
        Rng rng = make_stream(c.seed, u * c.trials + r);
        runs[r] = simulate_sway(env, c.pole, c.sway, rng).theta;
    });
    return runs;
}

inline std::vector<NamedTable> run_wind(const ExperimentConfig& c)
{
    Table t;
    if (c.id == "fig6a")
        t = new_table(c, {"elements", "wind_speed", "theta_max_rad", "p_out", "p_out_stderr"});
    else if (c.id == "fig6b")
        t = new_table(c, {"elements", "wind_speed", "theta_max_rad", "coherence_s", "coherence_stderr_s",
                          "censored_fraction", "runs", "skipped", "lower_bound"});
    else
        t = new_table(c, {"elements", "wind_speed", "aligned_db", "gain_db", "loss_db", "loss_stderr_db"});
    std::vector<std::vector<std::vector<double>>> ens;
    for (std::size_t u = 0; u < c.wind_speeds.size(); ++u)
        ens.push_back(sway_ensemble(c, c.wind_speeds[u], u));
    const double dt = 1.0 / c.sway.sample_rate;
    for (int m : c.elements) {
        const double tmax = max_deflection(m, c.sway.alpha);
        const SwayLink link = SwayLink::matched(m, c.phase_bits);
        for (std::size_t u = 0; u < c.wind_speeds.size(); ++u) {
            const double speed = c.wind_speeds[u];
            if (c.id == "fig6a") {
                const ProbabilityEstimate p = outage_probability(ens[u], tmax);
                t.add_row({static_cast<long long>(m), speed, tmax, p.value, p.stderr_});
            } else if (c.id == "fig6b") {
                const CoherenceEstimate e = coherence_time(ens[u], tmax, dt);
                t.add_row({static_cast<long long>(m), speed, tmax, e.mean, e.stderr_, e.censored_fraction(),
                           static_cast<long long>(e.runs), static_cast<long long>(e.skipped),
                           static_cast<long long>(e.lower_bound ? 1 : 0)});
            } else {
                const SwayGainSummary s = sway_gain_summary(link, ens[u]);
                t.add_row({static_cast<long long>(m), speed, s.aligned_db, s.mean_gain_db, s.loss_db, s.loss_stderr_db});
            }
        }
    }
    return {{c.id, std::move(t)}};
}

inline std::vector<NamedTable> run_fig8(const ExperimentConfig& c)
{
    const int m = c.tx_elements;
    const std::size_t budget = static_cast<std::size_t>(c.budgets.front());
    std::vector<StrategySetup> setups;
    for (Strategy s : detail::all_strategies())
        setups.push_back(setup_strategy(c, s, m, budget));
    Table t = new_table(c, gain_columns());
    for (std::size_t i = 0; i < c.snr_db.size(); ++i) {
        const auto g = gain_point(c, setups, m, c.snr_db[i], i);
        for (std::size_t s = 0; s < setups.size(); ++s)
            add_gain_row(t, i, m, c.snr_db[i], budget, setups[s].strategy, g[s]);
    }
    return {{"fig8", std::move(t)}};
}

// Smallest budget at which the mean gain reaches `target`, interpolated
// linearly between adjacent sweep points; nullopt when never reached.
inline std::optional<double> budget_for_target(const std::vector<std::pair<double, double>>& budget_gain, double target)
{
    for (std::size_t i = 0; i < budget_gain.size(); ++i) {
        if (budget_gain[i].second >= target) {
            if (i == 0)
                return budget_gain[0].first;
            const auto [l0, g0] = budget_gain[i - 1];
            const auto [l1, g1] = budget_gain[i];
            return l0 + (target - g0) * (l1 - l0) / (g1 - g0);
        }
    }
    return std::nullopt;
}

inline std::vector<NamedTable> run_budget_sweep(const ExperimentConfig& c)
{
    const int m = c.tx_elements;
    Table t = new_table(c, gain_columns());
    Table q = new_table(c, {"strategy", "target_gain_db", "min_budget", "reached"});
    std::map<Strategy, std::vector<std::pair<double, double>>> curves;
    // (budget, strategies) points: adaptive and single-sided on `budgets`,
    // joint on `joint_budgets` when given.
    std::map<int, std::vector<Strategy>> plan;
    for (int b : c.budgets) {
        if (detail::adaptive_budget_ok(c, static_cast<std::size_t>(b)))
            plan[b].push_back(Strategy::Adaptive);
        plan[b].push_back(Strategy::SingleSided);
        if (c.joint_budgets.empty())
            plan[b].push_back(Strategy::Joint);
    }
    for (int b : c.joint_budgets)
        plan[b].push_back(Strategy::Joint);
    std::size_t point = 0;
    for (std::size_t si = 0; si < c.snr_db.size(); ++si) {
        for (const auto& [b, strategies] : plan) {
            const std::size_t budget = static_cast<std::size_t>(b);
            std::vector<StrategySetup> setups;
            for (Strategy s : strategies)
                setups.push_back(setup_strategy(c, s, m, budget));
            const auto g = gain_point(c, setups, m, c.snr_db[si], point);
            for (std::size_t s = 0; s < setups.size(); ++s) {
                add_gain_row(t, point, m, c.snr_db[si], budget, setups[s].strategy, g[s]);
                if (si == 0)
                    curves[setups[s].strategy].emplace_back(static_cast<double>(setups[s].soundings), g[s].mean_db);
            }
            ++point;
        }
    }
    for (Strategy s : detail::all_strategies()) {
        auto& cv = curves[s];
        std::sort(cv.begin(), cv.end());
        cv.erase(std::unique(cv.begin(), cv.end(), [](auto& a, auto& b) { return a.first == b.first; }), cv.end());
        const auto l = budget_for_target(cv, c.target_gain_db);
        q.add_row({std::string(strategy_name(s)), c.target_gain_db, l ? *l : std::numeric_limits<double>::quiet_NaN(),
                   static_cast<long long>(l ? 1 : 0)});
    }
    if (c.id == "fig9")
        return {{"fig9", std::move(t)}, {"fig9_target", std::move(q)}};
    return {{c.id, std::move(t)}, {c.id + "_target", std::move(q)}};
}

// L = M with K = 2 below 32 elements and 3 otherwise; L_K = round(M / 2K).
inline std::vector<NamedTable> run_fig10(const ExperimentConfig& c)
{
    Table t = new_table(c, gain_columns());
    for (std::size_t i = 0; i < c.elements.size(); ++i) {
        const int m = c.elements[i];
        ExperimentConfig cm = c;
        const std::size_t k = c.rounds > 0 ? static_cast<std::size_t>(c.rounds) : (m < 32 ? 2 : 3);
        cm.rounds = static_cast<int>(k);
        cm.level_sizes.clear();
        const std::size_t lk = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(static_cast<double>(m) / (2.0 * static_cast<double>(k)))));
        const std::size_t budget = static_cast<std::size_t>(m);
        std::vector<StrategySetup> setups;
        setups.push_back(setup_strategy(cm, Strategy::Adaptive, m, 2 * k * lk, lk));
        setups.push_back(setup_strategy(cm, Strategy::SingleSided, m, budget));
        setups.push_back(setup_strategy(cm, Strategy::Joint, m, budget));
        const auto g = gain_point(cm, setups, m, c.snr_db.front(), i);
        for (std::size_t s = 0; s < setups.size(); ++s)
            add_gain_row(t, i, m, c.snr_db.front(), budget, setups[s].strategy, g[s]);
    }
    return {{"fig10", std::move(t)}};
}

inline std::vector<NamedTable> run_linkbudget(const ExperimentConfig& c)
{
    Table t = new_table(c, {"distance_m", "absorption_db_per_km", "pathloss_db", "noise_floor_dbm", "required_gain_db"});
    for (double a : c.absorption_db_per_km) {
        LinkBudget b = c.budget;
        b.absorption_db_per_km = a;
        for (double d : c.distances)
            t.add_row({d, a, pathloss(d, b), noise_floor_dbm(b), required_gain(d, b)});
    }
    return {{"linkbudget", std::move(t)}};
}

inline std::vector<NamedTable> experiment_tables(const ExperimentConfig& c)
{
    c.validate();
    if (c.id == "fig4")
        return run_fig4(c);
    if (c.id == "fig6a" || c.id == "fig6b" || c.id == "fig12")
        return run_wind(c);
    if (c.id == "fig8")
        return run_fig8(c);
    if (c.id == "fig9" || c.id == "custom")
        return run_budget_sweep(c);
    if (c.id == "fig10")
        return run_fig10(c);
    if (c.id == "linkbudget")
        return run_linkbudget(c);
    throw ConfigError("unknown experiment id '" + c.id + "'");
}

// Writes <out>/<name>.csv for every table of the experiment; returns the paths.
inline std::vector<std::string> run_experiment(const ExperimentConfig& c, const std::string& out_dir)
{
    const auto tables = experiment_tables(c);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" + out_dir + "': " + ec.message());
    std::vector<std::string> paths;
    for (const auto& nt : tables) {
        const std::string path = (std::filesystem::path(out_dir) / (nt.name + ".csv")).string();
        emit_csv(nt.table, path);
        paths.push_back(path);
    }
    return paths;
}

} // namespace mmwbf

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <vector>

#include "channel.hpp"
#include "codebook.hpp"

namespace mmwbf {

struct AlignmentResult {
    BeamVector f_opt;
    BeamVector z_opt;
    std::size_t l_opt = 0;
    std::vector<SoundingRecord> log;
    std::size_t soundings = 0;
};

using BeamPredicate = std::function<bool(const BeamVector&)>;

inline bool allow_all(const BeamVector&) { return true; }

// argmax over unmasked records of |y|^2, lowest index on ties. Records whose
// beams fail the predicates are marked masked.
inline std::size_t hard_align_index(std::vector<SoundingRecord>& log, const BeamPredicate& allowed_f = allow_all,
                                    const BeamPredicate& allowed_z = allow_all)
{
    if (log.empty())
        throw DomainError("hard alignment needs at least one sounding");
    std::size_t best = log.size();
    double best_v = -1.0;
    for (std::size_t l = 0; l < log.size(); ++l) {
        auto& r = log[l];
        if (!allowed_f(r.f) || !allowed_z(r.z))
            r.masked = true;
        if (r.masked)
            continue;
        const double v = std::norm(r.y);
        if (v > best_v) {
            best_v = v;
            best = l;
        }
    }
    if (best == log.size())
        throw AlignmentFailure("every sounding was masked");
    return best;
}

inline AlignmentResult hard_align(std::vector<SoundingRecord> log, const BeamPredicate& allowed_f = allow_all,
                                  const BeamPredicate& allowed_z = allow_all)
{
    AlignmentResult r;
    r.l_opt = hard_align_index(log, allowed_f, allowed_z);
    r.f_opt = log[r.l_opt].f;
    r.z_opt = log[r.l_opt].z;
    r.soundings = log.size();
    r.log = std::move(log);
    return r;
}

// Observation source shared by the strategies: a fixed channel, training SNR
// and noise generator. With `noiseless` set the noise term is dropped.
struct Sounder {
    const CMatrix* h = nullptr;
    double rho = 1.0;
    Rng* rng = nullptr;
    bool noiseless = false;

    Sounder(const CMatrix& channel, double snr, Rng& gen, bool no_noise = false)
        : h(&channel), rho(snr), rng(&gen), noiseless(no_noise)
    {
        if (!(rho >= 0.0))
            throw DomainError("training SNR must be nonnegative");
    }

    SoundingRecord operator()(const BeamVector& f, const BeamVector& z, std::size_t index) const
    {
        return noiseless ? sound_noiseless(*h, f, z, rho, index) : sound(*h, f, z, rho, *rng, index);
    }
};

struct AlignmentOptions {
    BeamPredicate allowed_f = allow_all;
    BeamPredicate allowed_z = allow_all;
    bool noiseless = false;
};

// All card(F) card(Z) pairs, combiner-major: l = j card(F) + i for combiner j, beamformer i.
inline AlignmentResult exhaustive_joint(const CMatrix& h, const Codebook& f, const Codebook& z, double rho, Rng& rng,
                                        const AlignmentOptions& opt = {})
{
    if (f.size() == 0 || z.size() == 0)
        throw DomainError("joint search needs nonempty codebooks");
    const CMatrix fm = detail::stack_beams(f);
    const CMatrix zm = detail::stack_beams(z);
    if (h.cols() != fm.rows() || h.rows() != zm.rows())
        throw DomainError("channel dimensions do not match the codebooks");
    if (!(rho >= 0.0))
        throw DomainError("training SNR must be nonnegative");
    const CMatrix y = std::sqrt(rho) * (zm.adjoint() * h * fm);
    std::vector<SoundingRecord> log;
    log.reserve(f.size() * z.size());
    for (std::size_t j = 0; j < z.size(); ++j)
        for (std::size_t i = 0; i < f.size(); ++i) {
            SoundingRecord r;
            r.index = log.size();
            r.f = f.beams[i];
            r.z = z.beams[j];
            r.y = y(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
            if (!opt.noiseless)
                r.y += complex_normal(rng);
            r.side = 'J';
            r.beam_index = r.index;
            log.push_back(std::move(r));
        }
    return hard_align(std::move(log), opt.allowed_f, opt.allowed_z);
}

namespace detail {
// Sweep `candidates` of `cb` on one side while the other side holds `fixed`;
// returns the position in `log` of the winner of this sweep.
inline std::size_t sweep(const Sounder& s, const Codebook& cb, const std::vector<std::size_t>& candidates,
                         const BeamVector& fixed, bool transmit, int level, std::vector<SoundingRecord>& log,
                         const AlignmentOptions& opt)
{
    std::vector<SoundingRecord> part;
    part.reserve(candidates.size());
    for (std::size_t c : candidates) {
        const BeamVector& b = cb.beams.at(c);
        SoundingRecord r = transmit ? s(b, fixed, log.size() + part.size()) : s(fixed, b, log.size() + part.size());
        r.level = level;
        r.side = transmit ? 'T' : 'R';
        r.beam_index = c;
        part.push_back(std::move(r));
    }
    const std::size_t w = hard_align_index(part, opt.allowed_f, opt.allowed_z);
    const std::size_t pos = log.size() + w;
    for (auto& r : part)
        log.push_back(std::move(r));
    return pos;
}

inline std::vector<std::size_t> all_indices(std::size_t n)
{
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = i;
    return v;
}
} // namespace detail

// Broadened beam with the level-1 design parameters, steered at the sector center.
inline BeamVector initial_beam(const HierarchicalCodebook& h)
{
    const Codebook& l1 = h.level(0);
    return broadened_beam({l1.n_subarrays, l1.spoil_angle, l1.geom.sector.center(), l1.q}, l1.geom);
}

// Sweep F with a fixed combiner, then Z with the winning beamformer.
inline AlignmentResult single_sided(const CMatrix& h, const Codebook& f, const Codebook& z,
                                    const BeamVector& fixed_combiner, double rho, Rng& rng,
                                    const AlignmentOptions& opt = {})
{
    if (f.size() == 0 || z.size() == 0)
        throw DomainError("single-sided search needs nonempty codebooks");
    const Sounder s(h, rho, rng, opt.noiseless);
    std::vector<SoundingRecord> log;
    log.reserve(f.size() + z.size());
    const std::size_t wf = detail::sweep(s, f, detail::all_indices(f.size()), fixed_combiner, true, 1, log, opt);
    const BeamVector f_opt = log[wf].f;
    const std::size_t wz = detail::sweep(s, z, detail::all_indices(z.size()), f_opt, false, 1, log, opt);
    AlignmentResult r;
    r.f_opt = f_opt;
    r.z_opt = log[wz].z;
    r.l_opt = wz;
    r.soundings = log.size();
    r.log = std::move(log);
    return r;
}

struct PingPongSchedule {
    std::size_t rounds = 3;         // K
    std::size_t per_round = 8;      // L_K
    BeamVector initial_combiner{};  // empty: initial_beam of the receive hierarchy

    std::size_t total() const { return 2 * rounds * per_round; }

    static PingPongSchedule from_budget(std::size_t total_soundings, std::size_t rounds)
    {
        if (rounds < 1 || total_soundings % (2 * rounds) != 0 || total_soundings == 0)
            throw ConfigError("sounding budget must be a positive multiple of 2K");
        return {rounds, total_soundings / (2 * rounds), {}};
    }
};

inline void validate_schedule(const PingPongSchedule& s, const HierarchicalCodebook& hf, const HierarchicalCodebook& hz)
{
    if (s.rounds < 1 || s.per_round < 1)
        throw ConfigError("schedule needs K >= 1 and L_K >= 1");
    for (const auto* h : {&hf, &hz}) {
        if (h->depth() != s.rounds)
            throw ConfigError("hierarchy depth " + std::to_string(h->depth()) + " does not match K = " +
                              std::to_string(s.rounds));
        if (h->level(0).size() != s.per_round)
            throw ConfigError("level-1 size must equal L_K");
        if (s.rounds > 1 && h->branch_factor != s.per_round)
            throw ConfigError("hierarchy branch factor must equal L_K");
    }
}

// K rounds; in round k the combiner holds z_opt while L_K transmit candidates
// are swept (level 1 at k = 1, else the children of the previous winner),
// then the beamformer holds the new f_opt while L_K receive candidates are swept.
inline AlignmentResult ping_pong_hierarchical(const CMatrix& h, const HierarchicalCodebook& hf,
                                              const HierarchicalCodebook& hz, const PingPongSchedule& sched,
                                              double rho, Rng& rng, const AlignmentOptions& opt = {})
{
    validate_schedule(sched, hf, hz);
    const Sounder s(h, rho, rng, opt.noiseless);
    std::vector<SoundingRecord> log;
    log.reserve(sched.total());
    BeamVector z_opt = sched.initial_combiner.size() > 0 ? sched.initial_combiner : initial_beam(hz);
    BeamVector f_opt;
    std::size_t last = 0;
    for (std::size_t k = 0; k < sched.rounds; ++k) {
        const std::vector<std::size_t> fc =
            k == 0 ? detail::all_indices(hf.level(0).size()) : children(hf, k - 1, f_opt);
        const std::size_t wf = detail::sweep(s, hf.level(k), fc, z_opt, true, static_cast<int>(k + 1), log, opt);
        f_opt = log[wf].f;
        const std::vector<std::size_t> zc =
            k == 0 ? detail::all_indices(hz.level(0).size()) : children(hz, k - 1, z_opt);
        last = detail::sweep(s, hz.level(k), zc, f_opt, false, static_cast<int>(k + 1), log, opt);
        z_opt = log[last].z;
    }
    AlignmentResult r;
    r.f_opt = f_opt;
    r.z_opt = z_opt;
    r.l_opt = last;
    r.soundings = log.size();
    r.log = std::move(log);
    return r;
}

inline double gain_linear(const CMatrix& h, const BeamVector& f, const BeamVector& z)
{
    return std::norm(bilinear(h, f, z));
}

// 10 log10 |z^* H f|^2, floored at `floor_db`.
inline double beamforming_gain(const CMatrix& h, const BeamVector& f, const BeamVector& z, double floor_db = -100.0)
{
    const double g = gain_linear(h, f, z);
    if (!(g > 0.0))
        return floor_db;
    return std::max(to_db(g), floor_db);
}

// l, level, side, beam_index, re_y, im_y
inline void write_sounding_log(std::ostream& os, const std::vector<SoundingRecord>& log)
{
    os << "l,level,side,beam_index,re_y,im_y,masked\n";
    char buf[128];
    for (const auto& r : log) {
        std::snprintf(buf, sizeof buf, "%zu,%d,%c,%zu,%.17g,%.17g,%d\n", r.index, r.level, r.side, r.beam_index,
                      r.y.real(), r.y.imag(), r.masked ? 1 : 0);
        os << buf;
    }
}

} // namespace mmwbf

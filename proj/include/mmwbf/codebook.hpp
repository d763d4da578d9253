// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "manifold.hpp"

namespace mmwbf {

// Ordered set of phase-quantized beams sharing one array and one phase
// resolution. `directions` holds the electrical beam directions psi_i.
struct Codebook {
    ArrayGeometry geom;
    int q = 5;
    std::vector<BeamVector> beams;
    std::vector<double> directions;
    // broadening parameters the beams were built with (1 and 0 for plain steering beams)
    int n_subarrays = 1;
    double spoil_angle = 0.0;

    std::size_t size() const { return beams.size(); }
    const BeamVector& operator[](std::size_t i) const { return beams[i]; }
};

struct BroadenedBeamSpec {
    int n_subarrays = 1;
    double spoil_angle = 0.0; // radians
    double center = 0.0;      // radians from broadside
    int q = 5;
};

inline void require_linear(const ArrayGeometry& geom)
{
    if (geom.kind != ArrayKind::Linear)
        throw DomainError("codebook construction supports linear arrays only");
}

// psi_i = psi_LB + (psi_UB - psi_LB)/(2N) + i (psi_UB - psi_LB)/N
inline std::vector<double> uniform_directions(const ArrayGeometry& geom, std::size_t n)
{
    if (n < 1)
        throw DomainError("codebook size must be at least one");
    const double lo = geom.psi_lo();
    const double width = geom.psi_hi() - lo;
    std::vector<double> psi(n);
    for (std::size_t i = 0; i < n; ++i)
        psi[i] = lo + width / (2.0 * n) + static_cast<double>(i) * width / static_cast<double>(n);
    return psi;
}

inline double direction_angle(const ArrayGeometry& geom, double psi)
{
    const double s = psi / (2.0 * pi * geom.spacing);
    if (std::abs(s) > 1.0 + 1e-12)
        throw DomainError("beam direction outside the realizable electrical-angle range");
    return std::asin(std::clamp(s, -1.0, 1.0));
}

// Concatenation of n_subarrays phase-continuous steering segments; segment j
// (1-based) points at center + (j - (n+1)/2) * spoil_angle.
inline BeamVector broadened_beam(const BroadenedBeamSpec& spec, const ArrayGeometry& geom)
{
    require_linear(geom);
    const int m_total = geom.elements_per_axis;
    if (spec.n_subarrays < 1 || m_total % spec.n_subarrays != 0)
        throw DomainError("number of subarrays must divide the array size");
    if (spec.spoil_angle < 0.0)
        throw DomainError("spoil angle must be nonnegative");
    const int seg = m_total / spec.n_subarrays;
    CVector w(m_total);
    double phase = 0.0;
    for (int j = 0; j < spec.n_subarrays; ++j) {
        const double offset = (static_cast<double>(j + 1) - 0.5 * (spec.n_subarrays + 1)) * spec.spoil_angle;
        const double step = 2.0 * pi * geom.spacing * std::sin(spec.center + offset);
        for (int i = 0; i < seg; ++i) {
            w[j * seg + i] = std::polar(1.0, phase);
            phase += step;
        }
    }
    return quantize_beam(w, spec.q);
}

namespace detail {

inline Codebook make_codebook(const ArrayGeometry& geom, std::size_t n, int q, int n_sub, double spoil)
{
    require_linear(geom);
    Codebook cb;
    cb.geom = geom;
    cb.q = q;
    cb.n_subarrays = n_sub;
    cb.spoil_angle = spoil;
    cb.directions = uniform_directions(geom, n);
    cb.beams.reserve(n);
    for (double psi : cb.directions)
        cb.beams.push_back(broadened_beam({n_sub, spoil, direction_angle(geom, psi), q}, geom));
    return cb;
}

// Columns e^{j m psi_g} on the midpoint grid over the sector's psi range.
// `stride` permutes the column order so that partial scans spread over the sector.
inline CMatrix manifold_grid(const ArrayGeometry& geom, int points, int stride = 1)
{
    const int m = geom.elements_per_axis;
    const double lo = geom.psi_lo();
    const double width = geom.psi_hi() - lo;
    CMatrix a(m, points);
    for (int c = 0; c < points; ++c) {
        const long g = (static_cast<long>(c) * stride) % points;
        const double psi = lo + (static_cast<double>(g) + 0.5) * width / points;
        a.col(c) = psi_response(m, psi);
    }
    return a;
}

inline CMatrix stack_beams(const Codebook& cb)
{
    CMatrix b(cb.geom.elements_per_axis, static_cast<Eigen::Index>(cb.size()));
    for (std::size_t i = 0; i < cb.size(); ++i)
        b.col(static_cast<Eigen::Index>(i)) = cb.beams[i].weights();
    return b;
}

// min over grid columns of max over beams of |f^* a|^2; returns early with a
// value <= cutoff as soon as some column falls to or below the cutoff.
inline double chi_scan(const CMatrix& beams, const CMatrix& grid, double cutoff)
{
    constexpr Eigen::Index block = 64;
    double running = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < grid.cols(); c += block) {
        const Eigen::Index w = std::min(block, grid.cols() - c);
        const Eigen::MatrixXd g = (beams.adjoint() * grid.middleCols(c, w)).cwiseAbs2();
        running = std::min(running, g.colwise().maxCoeff().minCoeff());
        if (running <= cutoff)
            return running;
    }
    return running;
}

inline int coprime_stride(int points)
{
    int s = static_cast<int>(points * 0.618033988749895) | 1;
    while (std::gcd(s, points) != 1)
        s += 2;
    return s;
}

} // namespace detail

inline Codebook uniform_codebook(const ArrayGeometry& geom, std::size_t n, int q)
{
    return detail::make_codebook(geom, n, q, 1, 0.0);
}

inline int default_grid_density(const ArrayGeometry& geom) { return 64 * geom.elements_per_axis; }

// chi = min over the manifold grid of max over beams of |f^* a(psi)|^2.
inline double chi_metric(const Codebook& cb, int grid_density = 0)
{
    if (cb.size() == 0)
        throw DomainError("chi of an empty codebook");
    require_linear(cb.geom);
    if (grid_density == 0)
        grid_density = default_grid_density(cb.geom);
    if (grid_density < 4 * cb.geom.elements_per_axis)
        throw DomainError("grid density must be at least 4 M points");
    return detail::chi_scan(detail::stack_beams(cb), detail::manifold_grid(cb.geom, grid_density),
                            -std::numeric_limits<double>::infinity());
}

// delta = sqrt(1 - chi / M)
inline double covering_distance(double chi, int m)
{
    double r = 1.0 - chi / static_cast<double>(m);
    if (r < 0.0) {
        warn("covering distance: chi exceeds M by " + std::to_string(-r * m) + ", clamped to 0");
        r = 0.0;
    }
    return std::sqrt(std::min(r, 1.0));
}

inline double covering_distance(const Codebook& cb, int grid_density = 0)
{
    return covering_distance(chi_metric(cb, grid_density), cb.geom.elements_per_axis);
}

// min(2 pi N / mu(P), M) with mu(P) the measure of the sector's psi range.
inline double lemma1_bound(const ArrayGeometry& geom, std::size_t n)
{
    const double mu = std::min(geom.psi_hi() - geom.psi_lo(), 2.0 * pi);
    const double m = static_cast<double>(geom.size());
    if (mu <= 0.0)
        return m;
    return std::min(2.0 * pi * static_cast<double>(n) / mu, m);
}

// Candidate broadening parameters searched by design_subcodebook.
struct DesignGrid {
    std::vector<int> n_subarrays;
    std::vector<double> spoil_angles; // radians

    // Divisors of M up to M/2 (1 always included) and 0..5 degrees in 0.02 degree steps.
    static DesignGrid defaults(int m)
    {
        DesignGrid g;
        for (int d = 1; d <= std::max(1, m / 2); ++d)
            if (m % d == 0)
                g.n_subarrays.push_back(d);
        for (int i = 0; i <= 250; ++i)
            g.spoil_angles.push_back(deg2rad(0.02 * i));
        return g;
    }
};

struct SubcodebookDesign {
    Codebook codebook;
    double chi = 0.0;
    std::size_t candidates = 0;
};

// Exhaustive search over (n_subarrays, spoil angle) for the broadened uniform
// codebook of size N with the largest chi. Candidates are visited in the order
// given; ties keep the earlier candidate.
inline SubcodebookDesign design_subcodebook(const ArrayGeometry& geom, std::size_t n, int q, const DesignGrid& grid,
                                            int grid_density = 0)
{
    require_linear(geom);
    if (grid.n_subarrays.empty() || grid.spoil_angles.empty())
        throw ConfigError("design grid must have at least one candidate per parameter");
    if (grid_density == 0)
        grid_density = default_grid_density(geom);
    if (grid_density < 4 * geom.elements_per_axis)
        throw DomainError("grid density must be at least 4 M points");
    const CMatrix manifold = detail::manifold_grid(geom, grid_density, detail::coprime_stride(grid_density));

    SubcodebookDesign best;
    best.chi = -std::numeric_limits<double>::infinity();
    bool have = false;
    for (int n_sub : grid.n_subarrays) {
        if (n_sub < 1 || geom.elements_per_axis % n_sub != 0)
            throw ConfigError("subarray candidate " + std::to_string(n_sub) + " does not divide M");
        for (double spoil : grid.spoil_angles) {
            ++best.candidates;
            // a single segment ignores the spoil angle
            if (n_sub == 1 && have && best.codebook.n_subarrays == 1)
                continue;
            Codebook cb = detail::make_codebook(geom, n, q, n_sub, spoil);
            const double chi = detail::chi_scan(detail::stack_beams(cb), manifold, best.chi);
            if (!have || chi > best.chi) {
                best.codebook = std::move(cb);
                best.chi = chi;
                have = true;
            }
        }
    }
    return best;
}

inline SubcodebookDesign design_subcodebook(const ArrayGeometry& geom, std::size_t n, int q)
{
    return design_subcodebook(geom, n, q, DesignGrid::defaults(geom.elements_per_axis));
}

// K levels of increasing resolution; level k < K is a designed (broadened)
// subcodebook, the finest level is a plain steering codebook.
struct HierarchicalCodebook {
    std::vector<Codebook> levels;
    std::size_t branch_factor = 1;
    bool finest_covers_2m = false; // N_K >= 2M

    std::size_t depth() const { return levels.size(); }
    const Codebook& level(std::size_t k) const { return levels.at(k); }
};

inline void validate_hierarchy_sizes(const std::vector<std::size_t>& sizes, std::size_t branch)
{
    if (sizes.empty())
        throw ConfigError("hierarchy needs at least one level");
    if (branch < 1)
        throw ConfigError("branch factor must be positive");
    double cap = 1.0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        cap *= static_cast<double>(branch);
        if (sizes[k] < 1)
            throw ConfigError("level sizes must be positive");
        if (k > 0 && sizes[k] <= sizes[k - 1])
            throw ConfigError("level sizes must be strictly increasing");
        if (static_cast<double>(sizes[k]) > cap)
            throw ConfigError("level " + std::to_string(k + 1) + " size " + std::to_string(sizes[k]) +
                              " exceeds branch_factor^" + std::to_string(k + 1));
    }
}

template <typename DesignFn>
HierarchicalCodebook build_hierarchy_with(const ArrayGeometry& geom, const std::vector<std::size_t>& sizes, int q,
                                          std::size_t branch, DesignFn&& design)
{
    require_linear(geom);
    validate_hierarchy_sizes(sizes, branch);
    HierarchicalCodebook h;
    h.branch_factor = branch;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k)
        h.levels.push_back(design(geom, sizes[k], q));
    h.levels.push_back(uniform_codebook(geom, sizes.back(), q));
    h.finest_covers_2m = sizes.back() >= 2 * static_cast<std::size_t>(geom.elements_per_axis);
    return h;
}

inline HierarchicalCodebook build_hierarchy(const ArrayGeometry& geom, const std::vector<std::size_t>& sizes, int q,
                                            std::size_t branch, const DesignGrid& grid)
{
    return build_hierarchy_with(geom, sizes, q, branch, [&](const ArrayGeometry& g, std::size_t n, int bits) {
        return design_subcodebook(g, n, bits, grid).codebook;
    });
}

inline HierarchicalCodebook build_hierarchy(const ArrayGeometry& geom, const std::vector<std::size_t>& sizes, int q,
                                            std::size_t branch)
{
    return build_hierarchy(geom, sizes, q, branch, DesignGrid::defaults(geom.elements_per_axis));
}

// Indices (ascending) of the branch_factor beams of `next` whose minimum
// |parent^* f_i|^2 is largest; equal overlaps prefer the lower index.
inline std::vector<std::size_t> select_children(const Codebook& next, const BeamVector& parent, std::size_t count)
{
    if (count > next.size())
        throw ConfigError("branch factor exceeds the size of the next level");
    std::vector<double> v(next.size());
    for (std::size_t i = 0; i < next.size(); ++i)
        v[i] = std::round(parent.overlap(next.beams[i]) * 1e12); // equal to 12 digits counts as a tie
    std::vector<std::size_t> order(next.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    order.resize(count);
    std::sort(order.begin(), order.end());
    return order;
}

// Children of `parent` (a beam of level `level`, 0-based) in level + 1.
inline std::vector<std::size_t> children(const HierarchicalCodebook& h, std::size_t level, const BeamVector& parent)
{
    if (level + 1 >= h.depth())
        throw DomainError("the finest level has no children");
    return select_children(h.levels[level + 1], parent, h.branch_factor);
}

// ---------------------------------------------------------------------------
// Text format:
//
//   mmwbf-codebook 1
//   elements <M>
//   phase_bits <q>
//   spacing <d/lambda>
//   sector <lo> <hi>
//   size <N>
//   subarrays <n>
//   spoil_angle <rad>
//   directions <psi_0> ... <psi_{N-1}>
//   <N rows of M phase indices>
//
// Reals are written with 17 significant digits so that reading restores the
// identical codebook.

namespace detail {
inline std::string exact(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}
} // namespace detail

inline void write_codebook(std::ostream& os, const Codebook& cb)
{
    os << "mmwbf-codebook 1\n";
    os << "elements " << cb.geom.elements_per_axis << '\n';
    os << "phase_bits " << cb.q << '\n';
    os << "spacing " << detail::exact(cb.geom.spacing) << '\n';
    os << "sector " << detail::exact(cb.geom.sector.lo) << ' ' << detail::exact(cb.geom.sector.hi) << '\n';
    os << "size " << cb.size() << '\n';
    os << "subarrays " << cb.n_subarrays << '\n';
    os << "spoil_angle " << detail::exact(cb.spoil_angle) << '\n';
    os << "directions";
    for (double d : cb.directions)
        os << ' ' << detail::exact(d);
    os << '\n';
    for (const auto& b : cb.beams) {
        if (!b.quantized() || b.phase_bits() != cb.q)
            throw DomainError("only codebooks of beams quantized to the codebook's q can be written");
        const auto& idx = b.phase_indices();
        for (std::size_t m = 0; m < idx.size(); ++m)
            os << (m ? " " : "") << idx[m];
        os << '\n';
    }
}

inline Codebook read_codebook(std::istream& is)
{
    auto expect = [&](const std::string& key) {
        std::string k;
        if (!(is >> k) || k != key)
            throw ConfigError("codebook file: expected '" + key + "'");
    };
    auto real = [&]() {
        std::string tok;
        if (!(is >> tok))
            throw ConfigError("codebook file: truncated");
        return std::stod(tok);
    };
    expect("mmwbf-codebook");
    int version = 0;
    is >> version;
    if (version != 1)
        throw ConfigError("codebook file: unsupported version");
    Codebook cb;
    int m = 0;
    std::size_t n = 0;
    expect("elements");
    is >> m;
    expect("phase_bits");
    is >> cb.q;
    expect("spacing");
    const double spacing = real();
    expect("sector");
    const double lo = real();
    const double hi = real();
    cb.geom = ArrayGeometry::ula(m, spacing, {lo, hi});
    expect("size");
    is >> n;
    expect("subarrays");
    is >> cb.n_subarrays;
    expect("spoil_angle");
    cb.spoil_angle = real();
    expect("directions");
    for (std::size_t i = 0; i < n; ++i)
        cb.directions.push_back(real());
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> idx(static_cast<std::size_t>(m));
        for (auto& x : idx)
            if (!(is >> x))
                throw ConfigError("codebook file: truncated beam row");
        cb.beams.push_back(BeamVector::from_phase_indices(std::move(idx), cb.q));
    }
    if (!is)
        throw ConfigError("codebook file: malformed");
    return cb;
}

} // namespace mmwbf

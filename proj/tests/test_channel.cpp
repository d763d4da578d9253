// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <sstream>

#include <mmwbf/alignment.hpp>
#include <mmwbf/channel.hpp>

using namespace mmwbf;

TEST(Los, AllOnesAtBroadside)
{
    const auto g = ArrayGeometry::ula(2);
    const CMatrix h = los_channel(g, g, 0.0, 0.0).h;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            EXPECT_NEAR(std::abs(h(i, j) - cplx(1, 0)), 0.0, 1e-15);
}

TEST(Los, RankOneAndNorm)
{
    const auto g = ArrayGeometry::ula(32);
    for (double a : {-1.2, 0.0, 0.4})
        for (double b : {-0.3, 0.9}) {
            const CMatrix h = los_channel(g, g, a, b).h;
            Eigen::JacobiSVD<CMatrix> svd(h);
            const auto s = svd.singularValues();
            EXPECT_LT(s[1], 1e-12 * s[0]);
            EXPECT_NEAR(h.squaredNorm(), 1024.0, 1e-9);
        }
    EXPECT_THROW(los_channel(ArrayGeometry::ula(4, 0.5, {0.0, 1.0}), g, -0.5, 0.0), DomainError);
}

TEST(Street, CenteredSymmetry)
{
    StreetGeometry s;
    s.width = 20.0;
    s.distance = 50.0;
    s.tx_offset = s.rx_offset = 10.0;
    const auto ps = street_paths(s);
    ASSERT_EQ(ps.size(), 3u);
    EXPECT_TRUE(ps[0].los);
    EXPECT_NEAR(ps[0].delay, 0.0, 1e-18);
    const double refl = 2.0 * std::hypot(25.0, 10.0);
    EXPECT_NEAR(ps[1].length, refl, 1e-12);
    EXPECT_NEAR(ps[2].length, refl, 1e-12);
    // independent ray trace: bounce points at the wall midpoints
    EXPECT_NEAR(std::abs(ps[1].aod), std::atan2(10.0, 25.0), 1e-12);
    EXPECT_NEAR(std::abs(ps[2].aod), std::atan2(10.0, 25.0), 1e-12);
    EXPECT_NEAR(ps[1].aod, -ps[2].aod, 1e-12);
}

TEST(Street, OffCenterRayTrace)
{
    StreetGeometry s{20.0, 80.0, 4.0, 13.0};
    const auto ps = street_paths(s);
    // bottom-wall bounce: find x where the incidence equals the reflection angle
    const double xb = s.distance * s.tx_offset / (s.tx_offset + s.rx_offset);
    EXPECT_NEAR(ps[1].length, std::hypot(xb, s.tx_offset) + std::hypot(s.distance - xb, s.rx_offset), 1e-9);
    EXPECT_NEAR(ps[1].aod, -std::atan2(s.tx_offset, xb), 1e-12);
    const double ht = s.width - s.tx_offset, hr = s.width - s.rx_offset;
    const double xt = s.distance * ht / (ht + hr);
    EXPECT_NEAR(ps[2].aod, std::atan2(ht, xt), 1e-12);
    EXPECT_NEAR(ps[2].aoa, -std::atan2(hr, s.distance - xt), 1e-12);
    EXPECT_NEAR(ps[0].aod, std::atan2(9.0, 80.0), 1e-12);
    EXPECT_NEAR(ps[0].aoa, std::atan2(9.0, 80.0), 1e-12);
    for (const auto& p : ps) {
        EXPECT_GE(p.length, ps[0].length);
        EXPECT_GE(p.delay, 0.0);
    }
    std::ostringstream os;
    write_paths(os, ps);
    EXPECT_NE(os.str().find("reflection"), std::string::npos);
    EXPECT_THROW(street_paths({0.0, 50.0, 1.0, 1.0}), DomainError);
}

TEST(Rician, InfiniteKIsLos)
{
    const auto g = ArrayGeometry::ula(8);
    Rng rng = make_stream(1, 1);
    const auto ps = street_paths({20.0, 50.0, 7.0, 12.0});
    const CMatrix h = rician_channel(g, g, ps, std::numeric_limits<double>::infinity(), rng).h;
    const CMatrix l = los_channel(g, g, ps[0].aod, ps[0].aoa).h;
    EXPECT_NEAR((h - l).norm(), 0.0, 1e-12);
}

TEST(Rician, LosPowerFraction)
{
    const double k = from_db(13.2);
    EXPECT_NEAR(k / (k + 1.0), 0.9544, 1e-4);
}

TEST(Rician, Normalization)
{
    const auto g = ArrayGeometry::ula(8);
    const auto ps = street_paths({20.0, 50.0, 5.0, 15.0});
    double acc = 0.0;
    const int n = 10000;
    for (int t = 0; t < n; ++t) {
        Rng rng = make_stream(5, t);
        acc += rician_channel(g, g, ps, 13.2, rng).h.squaredNorm();
    }
    EXPECT_NEAR(acc / n / 64.0, 1.0, 0.02);
}

TEST(Sound, PureNoiseAndMatched)
{
    const auto g = ArrayGeometry::ula(32);
    const CMatrix h = los_channel(g, g, 0.3, -0.2).h;
    const auto f = BeamVector::from_weights(steering_vector(g, 0.3));
    const auto z = BeamVector::from_weights(steering_vector(g, -0.2));
    EXPECT_NEAR(std::norm(sound_noiseless(h, f, z, 1.0).y), 1024.0, 1e-8);

    Rng rng = make_stream(2, 0);
    double p0 = 0.0, p1 = 0.0;
    const int n = 100000;
    const auto fz = BeamVector::from_weights(steering_vector(g, 0.1));
    const double rho = 0.01;
    const double g2 = std::norm(bilinear(h, fz, z));
    for (int i = 0; i < n; ++i) {
        p0 += std::norm(sound(h, f, z, 0.0, rng).y);
        p1 += std::norm(sound(h, fz, z, rho, rng).y);
    }
    EXPECT_NEAR(p0 / n, 1.0, 0.02);
    EXPECT_NEAR(p1 / n / (rho * g2 + 1.0), 1.0, 0.02);
}

TEST(Sound, Bilinearity)
{
    const auto g = ArrayGeometry::ula(6);
    Rng rng = make_stream(4, 0);
    CMatrix h(6, 6);
    for (Eigen::Index i = 0; i < h.size(); ++i)
        h(i) = complex_normal(rng);
    CVector f1(6), f2(6), z(6);
    for (int i = 0; i < 6; ++i) {
        f1[i] = complex_normal(rng);
        f2[i] = complex_normal(rng);
        z[i] = complex_normal(rng);
    }
    const cplx a{0.3, -1.1};
    // linear in f, conjugate-linear in z
    const cplx lhs = z.dot(h * (f1 + a * f2));
    EXPECT_NEAR(std::abs(lhs - (z.dot(h * f1) + a * z.dot(h * f2))), 0.0, 1e-12);
    EXPECT_NEAR(std::abs((a * z).dot(h * f1) - std::conj(a) * z.dot(h * f1)), 0.0, 1e-12);
    EXPECT_THROW(sound(h, BeamVector::from_weights(f1), BeamVector::from_weights(z), -1.0, rng), DomainError);
}

// ---------------------------------------------------------------------------

TEST(HardAlign, SingleAndOracle)
{
    std::vector<SoundingRecord> one(1);
    one[0].y = {0.1, 0.0};
    EXPECT_EQ(hard_align_index(one), 0u);

    Rng rng = make_stream(8, 0);
    std::vector<SoundingRecord> log(16);
    for (std::size_t i = 0; i < log.size(); ++i) {
        log[i].index = i;
        log[i].y = complex_normal(rng);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < log.size(); ++i)
        if (std::norm(log[i].y) > std::norm(log[best].y))
            best = i;
    EXPECT_EQ(hard_align_index(log), best);
}

TEST(HardAlign, MaskedEverything)
{
    const auto g = ArrayGeometry::ula(4);
    std::vector<SoundingRecord> log(3);
    for (auto& r : log)
        r.f = r.z = BeamVector::from_weights(steering_vector(g, 0.0));
    auto none = [](const BeamVector&) { return false; };
    EXPECT_THROW(hard_align_index(log, none, allow_all), AlignmentFailure);
}

namespace {
Codebook with_beam(const ArrayGeometry& g, std::size_t n, double theta)
{
    Codebook cb = uniform_codebook(g, n, 5);
    cb.beams[n / 2] = BeamVector::from_weights(steering_vector(g, theta));
    return cb;
}
} // namespace

TEST(Joint, TrivialAndMatched)
{
    const auto g = ArrayGeometry::ula(16);
    const CMatrix h = los_channel(g, g, 0.25, -0.4).h;
    Rng rng = make_stream(1, 0);
    const auto f1 = uniform_codebook(g, 1, 5), z1 = uniform_codebook(g, 1, 5);
    const auto r1 = exhaustive_joint(h, f1, z1, 1.0, rng);
    EXPECT_EQ(r1.soundings, 1u);
    EXPECT_EQ(r1.l_opt, 0u);

    const auto f = with_beam(g, 5, 0.25), z = with_beam(g, 5, -0.4);
    AlignmentOptions o;
    o.noiseless = true;
    const auto r = exhaustive_joint(h, f, z, 1.0, rng, o);
    EXPECT_EQ(r.soundings, 25u);
    EXPECT_EQ(r.l_opt, 2u * 5u + 2u); // combiner-major
    EXPECT_NEAR(gain_linear(h, r.f_opt, r.z_opt), 256.0, 1e-8);
}

TEST(SingleSided, MatchedAndDegenerate)
{
    const auto g = ArrayGeometry::ula(16);
    const CMatrix h = los_channel(g, g, 0.25, -0.4).h;
    Rng rng = make_stream(1, 0);
    const auto f = with_beam(g, 6, 0.25), z = with_beam(g, 6, -0.4);
    AlignmentOptions o;
    o.noiseless = true;
    const auto r = single_sided(h, f, z, broadened_beam({4, deg2rad(4.0), 0.0, 5}, g), 1.0, rng, o);
    EXPECT_EQ(r.soundings, 12u);
    EXPECT_NEAR(gain_linear(h, r.f_opt, r.z_opt), 256.0, 1e-8);

    // L = 2 equals a 1 x 1 exhaustive search
    const auto f1 = uniform_codebook(g, 1, 5), z1 = uniform_codebook(g, 1, 5);
    const auto s = single_sided(h, f1, z1, z1[0], 1.0, rng, o);
    const auto j = exhaustive_joint(h, f1, z1, 1.0, rng, o);
    EXPECT_EQ(s.f_opt, j.f_opt);
    EXPECT_EQ(s.z_opt, j.z_opt);
}

TEST(PingPong, OnGridNoiselessConverges)
{
    const auto g = ArrayGeometry::ula(16);
    const auto h = build_hierarchy(g, {4, 16, 32}, 5, 4);
    const auto& fine = h.level(2);
    // on-grid LOS: directions of two level-K beams
    const double aod = direction_angle(g, fine.directions[20]);
    const double aoa = direction_angle(g, fine.directions[9]);
    const CMatrix ch = los_channel(g, g, aod, aoa).h;
    Rng rng = make_stream(0, 0);
    AlignmentOptions o;
    o.noiseless = true;
    const auto r = ping_pong_hierarchical(ch, h, h, {3, 4, {}}, 1.0, rng, o);
    EXPECT_EQ(r.soundings, 24u);
    // exhaustive over level K x level K
    double best = 0.0;
    for (const auto& f : fine.beams)
        for (const auto& z : fine.beams)
            best = std::max(best, gain_linear(ch, f, z));
    EXPECT_NEAR(gain_linear(ch, r.f_opt, r.z_opt), best, 1e-9);
    EXPECT_GE(to_db(best), to_db(256.0) - 1.0);
    for (const auto& rec : r.log)
        EXPECT_TRUE(rec.side == 'T' || rec.side == 'R');
}

TEST(PingPong, SingleRoundIsTwoSweeps)
{
    const auto g = ArrayGeometry::ula(8);
    const auto h = build_hierarchy(g, {5}, 5, 5);
    Rng r1 = make_stream(3, 0), r2 = make_stream(3, 0);
    const CMatrix ch = los_channel(g, g, 0.3, -0.6).h;
    const BeamVector init = initial_beam(h);
    const auto pp = ping_pong_hierarchical(ch, h, h, {1, 5, {}}, 2.0, r1);
    const auto ss = single_sided(ch, h.level(0), h.level(0), init, 2.0, r2);
    EXPECT_EQ(pp.f_opt, ss.f_opt);
    EXPECT_EQ(pp.z_opt, ss.z_opt);
    EXPECT_EQ(pp.soundings, 10u);
}

TEST(PingPong, ScheduleValidation)
{
    const auto g = ArrayGeometry::ula(16);
    const auto h = build_hierarchy(g, {4, 16, 32}, 5, 4);
    const CMatrix ch = los_channel(g, g, 0.0, 0.0).h;
    Rng rng = make_stream(0, 0);
    EXPECT_THROW(ping_pong_hierarchical(ch, h, h, {2, 4, {}}, 1.0, rng), ConfigError);
    EXPECT_THROW(ping_pong_hierarchical(ch, h, h, {3, 5, {}}, 1.0, rng), ConfigError);
    EXPECT_THROW(PingPongSchedule::from_budget(50, 3), ConfigError);
    EXPECT_EQ(PingPongSchedule::from_budget(48, 3).per_round, 8u);
}

TEST(Gain, CapFloorAndBruteForce)
{
    const auto g = ArrayGeometry::ula(32);
    const CMatrix h = los_channel(g, g, 0.2, 0.5).h;
    const auto f = BeamVector::from_weights(steering_vector(g, 0.2));
    const auto z = BeamVector::from_weights(steering_vector(g, 0.5));
    EXPECT_NEAR(beamforming_gain(h, f, z), 30.103, 1e-3);

    const auto g4 = ArrayGeometry::ula(4);
    const CMatrix h4 = los_channel(g4, g4, 0.0, 0.0).h;
    const auto o = BeamVector::from_weights(psi_response(4, pi / 2));
    EXPECT_DOUBLE_EQ(beamforming_gain(h4, o, o), -100.0);
    EXPECT_DOUBLE_EQ(beamforming_gain(h4, o, o, -60.0), -60.0);

    Rng rng = make_stream(6, 6);
    CVector a(32), b(32);
    for (int i = 0; i < 32; ++i) {
        a[i] = complex_normal(rng);
        b[i] = complex_normal(rng);
    }
    const auto fa = BeamVector::from_weights(a), zb = BeamVector::from_weights(b);
    cplx acc{0.0, 0.0};
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j)
            acc += std::conj(zb[i]) * h(i, j) * fa[j];
    EXPECT_NEAR(beamforming_gain(h, fa, zb), 10.0 * std::log10(std::norm(acc)), 1e-9);
}

TEST(Log, Serialization)
{
    const auto g = ArrayGeometry::ula(8);
    const auto h = build_hierarchy(g, {2, 4}, 5, 2);
    const CMatrix ch = los_channel(g, g, 0.1, 0.1).h;
    Rng rng = make_stream(0, 0);
    const auto r = ping_pong_hierarchical(ch, h, h, {2, 2, {}}, 1.0, rng);
    std::ostringstream os;
    write_sounding_log(os, r.log);
    std::istringstream is(os.str());
    std::string line;
    int n = 0;
    while (std::getline(is, line))
        ++n;
    EXPECT_EQ(n, 1 + 8);
}

// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <mmwbf/mmwbf.hpp>

using namespace mmwbf;

namespace {
std::string slurp(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::string temp_dir(const std::string& name)
{
    const auto p = std::filesystem::temp_directory_path() / ("mmwbf_test_" + name);
    std::filesystem::remove_all(p);
    return p.string();
}
} // namespace

TEST(LinkBudget, PathLoss)
{
    const LinkBudget b;
    EXPECT_NEAR(pathloss(1000.0, b), 32.5 + 20.0 * std::log10(60000.0) + 20.0, 1e-12);
    EXPECT_NEAR(pathloss(100.0, 60000.0, 2.2, 20.0), 108.06, 0.005);
    EXPECT_NEAR(pathloss(100.0, 60000.0, 2.2, 36.0) - pathloss(100.0, 60000.0, 2.2, 20.0), 1.6, 1e-12);
    EXPECT_THROW(pathloss(0.0, b), DomainError);
}

TEST(LinkBudget, RequiredGain)
{
    LinkBudget b;
    EXPECT_NEAR(noise_floor_dbm(b), -74.99, 0.005);
    const double g = required_gain(100.0, b);
    b.tx_power_dbm += 10.0;
    EXPECT_NEAR(required_gain(100.0, b), g - 10.0, 1e-12);
    double prev = -1e9;
    for (double d = 10.0; d <= 300.0; d += 10.0) {
        EXPECT_GT(required_gain(d, b), prev);
        prev = required_gain(d, b);
    }
}

TEST(Csv, RoundTripAndQuoting)
{
    Table t;
    t.add_meta("seed", "42");
    t.add_meta("config", "[a]\nx = 1\n");
    t.columns = {"x", "n", "s"};
    t.add_row({1.0, 3LL, std::string("plain")});
    t.add_row({0.1 + 0.2, -7LL, std::string("has,comma \"q\"")});
    t.add_row({std::numeric_limits<double>::quiet_NaN(), 0LL, std::string("12")});
    t.add_row({-1e-300, 5LL, std::string("")});
    std::stringstream ss;
    write_csv(ss, t);
    const Table back = read_csv(ss);
    ASSERT_EQ(back.rows.size(), t.rows.size());
    EXPECT_EQ(back.columns, t.columns);
    EXPECT_EQ(std::get<double>(back.rows[1][0]), 0.1 + 0.2);
    EXPECT_EQ(std::get<std::string>(back.rows[1][2]), "has,comma \"q\"");
    EXPECT_EQ(std::get<std::string>(back.rows[2][2]), "12");
    EXPECT_TRUE(std::isnan(std::get<double>(back.rows[2][0])));
    EXPECT_EQ(std::get<double>(back.rows[0][0]), 1.0);
    EXPECT_EQ(std::get<long long>(back.rows[0][1]), 3LL);
    EXPECT_EQ(back.meta[0], t.meta[0]);
    EXPECT_EQ(back.meta[1].second, "[a]\nx = 1");
    // rows without NaN compare equal
    Table a = t, c = back;
    a.rows.erase(a.rows.begin() + 2);
    c.rows.erase(c.rows.begin() + 2);
    a.meta.pop_back();
    c.meta.pop_back();
    EXPECT_EQ(a, c);
}

TEST(Csv, EmptyTableIsHeaderOnly)
{
    Table t;
    t.columns = {"a", "b"};
    std::ostringstream os;
    write_csv(os, t);
    EXPECT_EQ(os.str(), "a,b\n");
}

TEST(Csv, ByteIdenticalOutput)
{
    Table t;
    t.columns = {"v"};
    for (int i = 0; i < 10; ++i)
        t.add_row({std::sqrt(static_cast<double>(i))});
    std::ostringstream a, b;
    write_csv(a, t);
    write_csv(b, t);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_THROW(emit_csv(t, "/nonexistent_dir_mmwbf/x.csv"), std::runtime_error);
}

TEST(Config, DefaultsAndValidation)
{
    for (const auto& id : experiment_ids())
        EXPECT_NO_THROW(default_config(id).validate()) << id;
    EXPECT_THROW(default_config("fig99"), ConfigError);
    auto c = default_config("fig8");
    c.trials = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = default_config("fig9");
    c.snr_db.clear();
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, IniRoundTrip)
{
    for (const auto& id : experiment_ids()) {
        auto c = default_config(id);
        c.seed = 987654321;
        c.wind.strouhal = 0.25;
        const std::string text = to_ini(c);
        const auto back = load_config(text, id);
        EXPECT_EQ(to_ini(back), text) << id;
    }
}

TEST(Config, ParsesOverridesAndRanges)
{
    const std::string text = "[experiment]\nid = custom\ntrials = 7\n"
                             "[sweep]\nsnr_db = -10:5:10\nbudgets = 24, 48\n"
                             "[wind]\nstrouhal = 0.25\n";
    const auto c = load_config(text, "custom");
    EXPECT_EQ(c.trials, 7u);
    EXPECT_EQ(c.snr_db, (std::vector<double>{-10, -5, 0, 5, 10}));
    EXPECT_EQ(c.budgets, (std::vector<int>{24, 48}));
    EXPECT_DOUBLE_EQ(c.wind.strouhal, 0.25);
    EXPECT_THROW(load_config("[sweep]\nbogus = 1\n", "custom"), ConfigError);
    EXPECT_THROW(load_config("[experiment]\nid = fig4\n", "fig8"), ConfigError);
    EXPECT_THROW(load_config("[experiment]\ntrials = many\n", "fig8"), ConfigError);
}

TEST(Plan, LevelSizes)
{
    EXPECT_EQ(plan_hierarchy(48, 32).sizes, (std::vector<std::size_t>{8, 32, 64}));
    EXPECT_EQ(plan_hierarchy(24, 32).sizes, (std::vector<std::size_t>{6, 36}));
    EXPECT_EQ(plan_hierarchy(96, 32).sizes, (std::vector<std::size_t>{12, 16, 32, 64}));
    const auto big = plan_hierarchy(128, 32).sizes;
    for (std::size_t k = 1; k < big.size(); ++k)
        EXPECT_GT(big[k], big[k - 1]);
    EXPECT_NO_THROW(validate_hierarchy_sizes(big, 16));
    EXPECT_THROW(plan_hierarchy(50, 32), ConfigError);
}

TEST(Target, Interpolation)
{
    const std::vector<std::pair<double, double>> c{{10, 20}, {20, 25}, {30, 27}};
    EXPECT_NEAR(*budget_for_target(c, 26.0), 25.0, 1e-12);
    EXPECT_NEAR(*budget_for_target(c, 15.0), 10.0, 1e-12);
    EXPECT_FALSE(budget_for_target(c, 28.0).has_value());
}

TEST(Experiment, Fig4Schema)
{
    auto c = default_config("fig4");
    c.trials = 200;
    c.snr_db = {-30.0, -20.0};
    const auto t = experiment_tables(c);
    ASSERT_GE(t.size(), 1u);
    EXPECT_EQ(t[0].table.columns,
              (std::vector<std::string>{"snr_db", "pmis_mc", "pmis_stderr", "ub", "lb", "asym16", "asym18"}));
    EXPECT_EQ(t[0].table.rows.size(), 2u);
}

TEST(Experiment, DeterministicAcrossThreadsAndReloadable)
{
    auto c = default_config("fig8");
    c.trials = 40;
    c.snr_db = {0.0, 10.0};
    const std::string d1 = temp_dir("a"), d2 = temp_dir("b"), d3 = temp_dir("c");
    const auto p1 = run_experiment(c, d1);
    auto c3 = c;
    c3.threads = 3;
    run_experiment(c3, d3);
    run_experiment(c, d2);
    ASSERT_EQ(p1.size(), 1u);
    const std::string a = slurp(p1[0]);
    EXPECT_EQ(a, slurp(d2 + "/fig8.csv"));
    // only the embedded thread count differs
    std::string b = slurp(d3 + "/fig8.csv");
    const auto pos = b.find("threads = 3");
    ASSERT_NE(pos, std::string::npos);
    b.replace(pos, 11, "threads = 1");
    EXPECT_EQ(a, b);

    // the output file alone reproduces the run
    const auto again = load_config(read_config_text(p1[0]), "fig8");
    const std::string d4 = temp_dir("d");
    run_experiment(again, d4);
    EXPECT_EQ(a, slurp(d4 + "/fig8.csv"));

    std::istringstream is(a);
    const Table t = read_csv(is);
    EXPECT_EQ(t.rows.size(), 6u);
    bool seed = false, git = false;
    for (const auto& [k, v] : t.meta) {
        seed |= k == "seed" && v == "1";
        git |= k == "git" && !v.empty();
    }
    EXPECT_TRUE(seed);
    EXPECT_TRUE(git);
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        EXPECT_LE(t.number(r, "gain_db"), t.number(r, "cap_db") + 0.01);
}

TEST(Experiment, LinkBudgetTable)
{
    auto c = default_config("linkbudget");
    c.distances = {100.0};
    const auto t = experiment_tables(c);
    ASSERT_EQ(t[0].table.rows.size(), 2u);
    EXPECT_NEAR(t[0].table.number(0, "pathloss_db"), 108.063, 1e-3);
}

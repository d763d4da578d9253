// SPDX-License-Identifier: Apache-2.0
// Command-line front end: one subcommand per experiment.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <mmwbf/mmwbf.hpp>

namespace {

struct RunFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<int> threads;
    std::string out = "results";
    bool dump = false;
};

void add_run_flags(CLI::App* sub, RunFlags& f)
{
    sub->add_option("--config", f.config, "INI configuration, or a CSV produced by an earlier run")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "Master RNG seed");
    sub->add_option("--trials", f.trials, "Monte Carlo trials per sweep point");
    sub->add_option("--threads", f.threads, "Worker threads (0 uses all cores)");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_flag("--print-config", f.dump, "Print the resolved configuration and exit");
}

mmwbf::ExperimentConfig resolve(const std::string& id, const RunFlags& f)
{
    const std::string text = f.config.empty() ? std::string() : mmwbf::read_config_text(f.config);
    mmwbf::ExperimentConfig c = mmwbf::load_config(text, id);
    if (f.seed)
        c.seed = *f.seed;
    if (f.trials)
        c.trials = *f.trials;
    if (f.threads)
        c.threads = *f.threads;
    c.validate();
    return c;
}

int design_codebook(int m, std::size_t n, int q, const std::string& out)
{
    const auto geom = mmwbf::ArrayGeometry::ula(m);
    const auto d = mmwbf::design_subcodebook(geom, n, q);
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!out.empty()) {
        file.open(out);
        if (!file)
            throw std::runtime_error("cannot open '" + out + "'");
        os = &file;
    }
    mmwbf::write_codebook(*os, d.codebook);
    std::cerr << "chi = " << d.chi << ", covering distance = " << mmwbf::covering_distance(d.chi, m)
              << ", subarrays = " << d.codebook.n_subarrays
              << ", spoil = " << mmwbf::rad2deg(d.codebook.spoil_angle) << " deg\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Beam alignment and pole-sway simulator"};
    app.require_subcommand(1);

    std::map<std::string, RunFlags> flags;
    std::map<std::string, CLI::App*> subs;
    const std::map<std::string, std::string> help = {
        {"fig4", "Misalignment probability versus training SNR"},
        {"fig6a", "Beam outage probability versus wind speed"},
        {"fig6b", "Beam coherence time versus wind speed"},
        {"fig8", "Beamforming gain versus SNR at a fixed sounding budget"},
        {"fig9", "Beamforming gain versus sounding budget"},
        {"fig10", "Beamforming gain versus array size with L = M"},
        {"fig12", "Beamforming gain loss under pole sway"},
        {"linkbudget", "Required antenna gain versus link distance"},
        {"custom", "Gain sweep over SNR and budget lists from the configuration"},
    };
    for (const std::string& id : mmwbf::experiment_ids()) {
        CLI::App* sub = app.add_subcommand(id, help.count(id) ? help.at(id) : id);
        add_run_flags(sub, flags[id]);
        subs[id] = sub;
    }

    int dm = 32, dq = 5;
    std::size_t dn = 8;
    std::string dout;
    CLI::App* design = app.add_subcommand("design-codebook", "Design one broadened-beam subcodebook");
    design->add_option("--elements", dm, "Array size M")->check(CLI::PositiveNumber);
    design->add_option("--size", dn, "Number of beams N")->check(CLI::PositiveNumber);
    design->add_option("--bits", dq, "Phase-shifter resolution q")->check(CLI::Range(1, 16));
    design->add_option("--out", dout, "Output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (design->parsed())
            return design_codebook(dm, dn, dq, dout);
        for (auto& [id, sub] : subs) {
            if (!sub->parsed())
                continue;
            const mmwbf::ExperimentConfig c = resolve(id, flags[id]);
            if (flags[id].dump) {
                std::cout << mmwbf::to_ini(c);
                return 0;
            }
            for (const std::string& p : mmwbf::run_experiment(c, flags[id].out))
                std::cout << p << '\n';
            if (mmwbf::Diagnostics::instance().count() > 0)
                std::cerr << mmwbf::Diagnostics::instance().count() << " warning(s) raised\n";
            return 0;
        }
    } catch (const mmwbf::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

#include "pinn/app.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace pinn::app;

namespace {

struct Options {
    std::string config;
    std::optional<std::string> out, data;
    std::optional<std::uint64_t> seed;
    std::optional<int> seeds, scenario;
    std::optional<double> noise_sigma;
    bool baseline = false;
    bool paper_faithful = false;
    bool wall_time = false;
    std::vector<std::string> runs;
};

RunConfig resolve(const Options& o, bool seed_sets_noise) {
    RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
    Overrides ov;
    ov.out = o.out;
    ov.data_dir = o.data;
    ov.seeds = o.seeds;
    ov.scenario = o.scenario;
    ov.noise_sigma = o.noise_sigma;
    ov.baseline = o.baseline;
    ov.paper_faithful = o.paper_faithful;
    ov.wall_time = o.wall_time;
    if (seed_sets_noise && o.seed) {
        c.synth.temporal_seed = *o.seed;
        c.synth.fiber_seed = *o.seed;
    } else {
        ov.seed = o.seed;
    }
    apply_overrides(c, ov);
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Physics-informed reduced-order models for strain monitoring of a bent beam"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--data", o.data, "Directory holding the input datasets");
        sub->add_option("--seed", o.seed, "Base seed");
        sub->add_flag("--wall-time", o.wall_time, "Add the wall_time_s column to history CSVs");
    };
    auto training = [&](CLI::App* sub) {
        common(sub);
        sub->add_option("--seeds", o.seeds, "Number of seeds run one after another from --seed")
            ->check(CLI::PositiveNumber);
    };

    CLI::App* synth = app.add_subcommand("synth", "Generate synthetic sensor and fiber datasets");
    common(synth);
    synth->add_option("--noise-sigma", o.noise_sigma, "Noise standard deviation [microstrain]")
        ->check(CLI::NonNegativeNumber);

    CLI::App* tt = app.add_subcommand("train-temporal", "Train the temporal model or the data-only baseline");
    training(tt);
    tt->add_flag("--baseline", o.baseline, "Data-only network with sin activation");

    CLI::App* id = app.add_subcommand("identify-omega", "Identify omega^2 starting from the configured guess");
    training(id);

    CLI::App* ts = app.add_subcommand("train-spatial", "Train the spatial beam model for one scenario");
    training(ts);
    ts->add_option("--scenario", o.scenario, "1: compression data, 2: plus tension data, 3: tension weight 0.01")
        ->check(CLI::Range(1, 3));
    ts->add_flag("--paper-faithful", o.paper_faithful, "Drop the uy pin and the rotation penalty");

    CLI::App* rep = app.add_subcommand("report", "Summary table and SVG overlays of finished runs");
    rep->add_option("runs", o.runs, "Run directories");
    rep->add_option("--out", o.out, "Report directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (synth->parsed()) {
            cmd_synth(resolve(o, true), std::cout);
        } else if (tt->parsed()) {
            cmd_train_temporal(resolve(o, false), std::cout);
        } else if (id->parsed()) {
            cmd_identify_omega(resolve(o, false), std::cout);
        } else if (ts->parsed()) {
            cmd_train_spatial(resolve(o, false), std::cout);
        } else if (rep->parsed()) {
            std::vector<fs::path> dirs(o.runs.begin(), o.runs.end());
            cmd_report(dirs, o.out.value_or("report"), std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return kExitOk;
}

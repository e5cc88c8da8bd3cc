#include "pinn/app.hpp"
#include "pinn/oracle.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace pinn;
using namespace pinn::app;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "pinn_test_app" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
    std::ifstream is(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

// Small networks and budgets so every command finishes in about a second.
RunConfig tiny(const fs::path& root) {
    RunConfig c;
    c.data_dir = (root / "data").string();
    c.out = (root / "run").string();
    c.temporal.hidden = {6, 6};
    c.temporal.optim.adam_epochs = 20;
    c.temporal.optim.lbfgs_max_iters = 20;
    c.spatial.hidden = {8, 8};
    c.spatial.n_interior = 100;
    c.spatial.per_edge = 10;
    c.spatial.optim.adam_epochs = 10;
    c.spatial.optim.lbfgs_max_iters = 10;
    return c;
}

void synth_into(const RunConfig& c) {
    RunConfig s = c;
    s.out = c.data_dir;
    std::ostringstream log;
    cmd_synth(s, log);
}

} // namespace

TEST(Config, RoundTripThroughJson) {
    RunConfig c;
    c.seed = 42;
    c.spatial.scenario = 3;
    c.temporal.hidden = {4, 5};
    c.synth.crack.intervals.pop_back();
    const json j = config_to_json(c);
    const RunConfig back = config_from_json(j);
    EXPECT_EQ(config_to_json(back), j);
    EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, EmptyObjectGivesDefaults) {
    EXPECT_EQ(config_to_json(config_from_json(json::object())), config_to_json(RunConfig{}));
}

TEST(Config, UnknownKeyIsRejectedWithPath) {
    json j = config_to_json(RunConfig{});
    j["synth"]["bogus"] = 1;
    try {
        config_from_json(j);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("synth.bogus"), std::string::npos) << e.what();
    }
    json k = json::object();
    k["toplevel_typo"] = true;
    EXPECT_THROW(config_from_json(k), ConfigError);
}

TEST(Config, WrongTypeIsRejected) {
    json j = json::object();
    j["temporal"] = {{"w_ode", "high"}};
    EXPECT_THROW(config_from_json(j), ConfigError);
    j = json::object();
    j["seeds"] = 1.5;
    EXPECT_THROW(config_from_json(j), ConfigError);
}

TEST(Config, InvalidValuesAreRejected) {
    json j = json::object();
    j["spatial"] = {{"scenario", 4}};
    EXPECT_THROW(config_from_json(j), ConfigError);
    j = json::object();
    j["beam"] = {{"poisson_ratio", 0.6}};
    EXPECT_THROW(config_from_json(j), ConfigError);
}

TEST(Config, ScenarioDecidesTensionWeight) {
    RunConfig c;
    c.spatial.scenario = 3;
    EXPECT_EQ(config_to_json(c)["spatial"]["w_exp_t"], 0.01);
    c.spatial.scenario = 2;
    EXPECT_EQ(config_to_json(c)["spatial"]["w_exp_t"], 1.0);
    c.spatial.scenario = 1;
    EXPECT_FALSE(config_to_json(c)["spatial"].contains("w_exp_t"));

    json j = json::object();
    j["spatial"] = {{"scenario", 3}, {"w_exp_t", 0.5}};
    EXPECT_THROW(config_from_json(j), ConfigError);
    j["spatial"]["w_exp_t"] = 0.01;
    EXPECT_NO_THROW(config_from_json(j));
}

TEST(Config, LoadAcceptsCommentsAndReportsMissingFile) {
    const fs::path d = fresh_dir("load");
    std::ofstream(d / "c.json") << "{\n  // seed for the run\n  \"seed\": 3\n}\n";
    EXPECT_EQ(load_config(d / "c.json").seed, 3u);
    EXPECT_THROW(load_config(d / "missing.json"), std::exception);
    std::ofstream(d / "bad.json") << "{ \"seed\": ";
    EXPECT_THROW(load_config(d / "bad.json"), ConfigError);
}

TEST(Overrides, ApplyOnTopOfConfig) {
    RunConfig c;
    Overrides o;
    o.out = "x";
    o.seed = 9;
    o.seeds = 3;
    o.scenario = 2;
    o.noise_sigma = 0.0;
    o.baseline = true;
    o.paper_faithful = true;
    apply_overrides(c, o);
    EXPECT_EQ(c.out, "x");
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.seeds, 3);
    EXPECT_EQ(c.spatial.scenario, 2);
    EXPECT_EQ(c.synth.temporal_sigma, 0.0);
    EXPECT_EQ(c.synth.fiber_sigma, 0.0);
    EXPECT_TRUE(c.temporal.baseline);
    EXPECT_TRUE(c.spatial.paper_faithful);
    Overrides bad;
    bad.scenario = 0;
    EXPECT_THROW(apply_overrides(c, bad), ConfigError);
}

TEST(Synth, WritesThreeCsvFilesAndProvenance) {
    const fs::path root = fresh_dir("synth");
    RunConfig c = tiny(root);
    c.out = (root / "d").string();
    std::ostringstream log;
    cmd_synth(c, log);
    for (const char* f : {kTemporalFile, kFiber1File, kFiber2File, kProvenanceFile}) {
        EXPECT_TRUE(fs::exists(root / "d" / f)) << f;
    }
    int csv = 0;
    for (const auto& e : fs::directory_iterator(root / "d")) csv += e.path().extension() == ".csv";
    EXPECT_EQ(csv, 3);
    const json prov = read_json(root / "d" / kProvenanceFile);
    EXPECT_EQ(prov["kind"], "synthetic");
    EXPECT_EQ(prov["synth"]["omega_sq"], 9.87);
    EXPECT_EQ(lines(root / "d" / kTemporalFile).size(), 162u);
}

TEST(Synth, RerunIsByteIdentical) {
    const fs::path root = fresh_dir("synth_rerun");
    RunConfig c = tiny(root);
    std::ostringstream log;
    c.out = (root / "a").string();
    cmd_synth(c, log);
    c.out = (root / "b").string();
    cmd_synth(c, log);
    for (const char* f : {kTemporalFile, kFiber1File, kFiber2File}) {
        EXPECT_EQ(slurp(root / "a" / f), slurp(root / "b" / f)) << f;
    }
}

TEST(Synth, ZeroNoiseMatchesOracle) {
    const fs::path root = fresh_dir("synth_clean");
    RunConfig c = tiny(root);
    Overrides o;
    o.noise_sigma = 0.0;
    o.out = (root / "d").string();
    apply_overrides(c, o);
    std::ostringstream log;
    cmd_synth(c, log);
    const auto s = datagen::load_series_csv(root / "d" / kTemporalFile);
    for (const auto& p : s.samples) EXPECT_EQ(p.strain, oracle::harmonic_exact(-293.0, 9.87, p.t));
    const auto f1 = datagen::load_fiber_csv(root / "d" / kFiber1File, datagen::FiberId::compression);
    for (const auto& p : f1.points) {
        EXPECT_EQ(p.strain, oracle::euler_bernoulli_strain(c.beam.geometry, c.beam.material, c.beam.layout, p.x, p.y));
    }
}

TEST(Synth, UnwritableOutputIsIoError) {
    const fs::path root = fresh_dir("synth_io");
    std::ofstream(root / "blocker") << "x";
    RunConfig c = tiny(root);
    c.out = (root / "blocker" / "sub").string();
    std::ostringstream log;
    try {
        cmd_synth(c, log);
        FAIL() << "expected IoError";
    } catch (const IoError& e) {
        EXPECT_EQ(exit_code_for(e), kExitIo);
    }
}

TEST(TrainTemporal, MissingDatasetNamesExpectedPath) {
    const fs::path root = fresh_dir("tt_missing");
    const RunConfig c = tiny(root);
    std::ostringstream log;
    try {
        cmd_train_temporal(c, log);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find((root / "data" / kTemporalFile).string()), std::string::npos);
    }
}

TEST(TrainTemporal, WritesHistoryPredictionAndMetrics) {
    const fs::path root = fresh_dir("tt");
    const RunConfig c = tiny(root);
    synth_into(c);
    std::ostringstream log;
    cmd_train_temporal(c, log);
    const fs::path out = root / "run";
    for (const char* f : {kConfigFile, kMetricsFile, "params.txt", "history.csv", "prediction.csv", kProvenanceFile}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    const auto hist = lines(out / "history.csv");
    ASSERT_GT(hist.size(), 22u);
    EXPECT_EQ(hist[0], "phase,iter,loss_total,loss_component_ode,loss_component_data");
    std::size_t k = 1;
    while (k < hist.size() && hist[k].rfind("adam,", 0) == 0) ++k;
    EXPECT_EQ(k, 22u);
    for (; k < hist.size(); ++k) EXPECT_EQ(hist[k].rfind("lbfgs,", 0), 0u) << hist[k];

    const auto pred = lines(out / "prediction.csv");
    EXPECT_EQ(pred[0], "t_s,strain_pred_microstrain");
    EXPECT_EQ(pred.size(), 1602u);

    const json m = read_json(out / kMetricsFile);
    for (const char* key : {"rel_l2_train", "rel_l2_extrap", "final_loss", "loss_ode", "loss_data", "wall_time_s"}) {
        EXPECT_TRUE(m.contains(key)) << key;
    }
    EXPECT_EQ(m["kind"], "temporal");
    EXPECT_EQ(m["n_train"], 61);
    EXPECT_EQ(m["n_holdout"], 100);

    EXPECT_EQ(config_to_json(load_config(out / kConfigFile)), config_to_json(c));
}

TEST(TrainTemporal, BaselineUsesSinAndNoOde) {
    const fs::path root = fresh_dir("tt_base");
    RunConfig c = tiny(root);
    c.temporal.baseline = true;
    synth_into(c);
    std::ostringstream log;
    cmd_train_temporal(c, log);
    const json m = read_json(root / "run" / kMetricsFile);
    EXPECT_EQ(m["kind"], "baseline");
    EXPECT_EQ(m["activation"], "sin");
    EXPECT_EQ(m["loss_ode"], 0.0);
}

TEST(TrainTemporal, RerunIsByteIdentical) {
    const fs::path root = fresh_dir("tt_det");
    RunConfig c = tiny(root);
    synth_into(c);
    std::ostringstream log;
    c.out = (root / "a").string();
    cmd_train_temporal(c, log);
    c.out = (root / "b").string();
    cmd_train_temporal(c, log);
    for (const char* f : {"history.csv", "prediction.csv", "params.txt"}) {
        EXPECT_EQ(slurp(root / "a" / f), slurp(root / "b" / f)) << f;
    }
}

TEST(TrainTemporal, SeedsFanOutWithAggregate) {
    const fs::path root = fresh_dir("tt_seeds");
    RunConfig c = tiny(root);
    c.seed = 4;
    c.seeds = 3;
    synth_into(c);
    std::ostringstream log;
    cmd_train_temporal(c, log);
    std::vector<double> extrap;
    for (int s = 4; s < 7; ++s) {
        const fs::path d = root / "run" / ("seed_" + std::to_string(s));
        ASSERT_TRUE(fs::exists(d / kMetricsFile)) << d;
        extrap.push_back(read_json(d / kMetricsFile)["rel_l2_extrap"].get<double>());
        EXPECT_EQ(load_config(d / kConfigFile).seed, static_cast<std::uint64_t>(s));
    }
    const json agg = read_json(root / "run" / "aggregate.json");
    EXPECT_EQ(agg["median"]["rel_l2_extrap"].get<double>(), median(extrap));

    // A single seed run reproduces the matching fan-out member.
    RunConfig one = c;
    one.seeds = 1;
    one.seed = 5;
    one.out = (root / "single").string();
    cmd_train_temporal(one, log);
    EXPECT_EQ(slurp(root / "single" / "prediction.csv"), slurp(root / "run" / "seed_5" / "prediction.csv"));
}

TEST(IdentifyOmega, TrajectoryStartsAtInitialGuess) {
    const fs::path root = fresh_dir("id");
    const RunConfig c = tiny(root);
    synth_into(c);
    std::ostringstream log;
    cmd_identify_omega(c, log);
    const auto traj = lines(root / "run" / "trajectory.csv");
    const auto hist = lines(root / "run" / "history.csv");
    EXPECT_EQ(traj[0], "phase,iter,omega_sq");
    EXPECT_EQ(traj.size(), hist.size());
    EXPECT_EQ(traj[1], "adam,0,1");
    const json m = read_json(root / "run" / kMetricsFile);
    EXPECT_EQ(m["omega_sq_initial"], 1.0);
    EXPECT_EQ(m["records"].get<std::size_t>(), traj.size() - 1);
    EXPECT_GT(m["omega_sq_final"].get<double>(), 0.0);
}

TEST(TrainSpatial, WritesFieldGridAndFiberPredictions) {
    const fs::path root = fresh_dir("ts");
    RunConfig c = tiny(root);
    c.spatial.scenario = 3;
    synth_into(c);
    std::ostringstream log;
    cmd_train_spatial(c, log);
    const fs::path out = root / "run";
    const auto field = lines(out / "field.csv");
    EXPECT_EQ(field.size(), 2001u);
    EXPECT_EQ(lines(out / "fiber1_pred.csv").size(), 201u);
    EXPECT_EQ(lines(out / "fiber2_pred.csv").size(), 101u);
    const json m = read_json(out / kMetricsFile);
    EXPECT_EQ(m["w_exp_t"], 0.01);
    EXPECT_EQ(m["scenario"], 3);
    for (const char* key : {"rel_l2_fiber1", "rel_l2_fiber2", "smoothness_fiber2", "peak_ratio_fiber2",
                            "center_exx_microstrain"}) {
        EXPECT_TRUE(m.contains(key)) << key;
    }
    EXPECT_EQ(read_json(out / kConfigFile)["spatial"]["w_exp_t"], 0.01);
}

TEST(TrainSpatial, ScenarioOneOmitsTensionWeight) {
    const fs::path root = fresh_dir("ts1");
    const RunConfig c = tiny(root);
    synth_into(c);
    std::ostringstream log;
    cmd_train_spatial(c, log);
    EXPECT_FALSE(read_json(root / "run" / kConfigFile)["spatial"].contains("w_exp_t"));
    EXPECT_EQ(read_json(root / "run" / kMetricsFile)["loss_exp_t"], 0.0);
}

TEST(TrainSpatial, TensionScenarioWithoutTensionDataIsDataError) {
    const fs::path root = fresh_dir("ts_missing");
    RunConfig c = tiny(root);
    synth_into(c);
    fs::remove(root / "data" / kFiber2File);
    c.spatial.scenario = 2;
    std::ostringstream log;
    try {
        cmd_train_spatial(c, log);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_EQ(exit_code_for(e), kExitData);
        EXPECT_NE(std::string(e.what()).find(kFiber2File), std::string::npos);
    }
    c.spatial.scenario = 1;
    EXPECT_NO_THROW(cmd_train_spatial(c, log));
}

TEST(TrainSpatial, RerunIsByteIdentical) {
    const fs::path root = fresh_dir("ts_det");
    RunConfig c = tiny(root);
    c.spatial.scenario = 2;
    synth_into(c);
    std::ostringstream log;
    c.out = (root / "a").string();
    cmd_train_spatial(c, log);
    c.out = (root / "b").string();
    cmd_train_spatial(c, log);
    for (const char* f : {"field.csv", "fiber1_pred.csv", "fiber2_pred.csv", "history.csv"}) {
        EXPECT_EQ(slurp(root / "a" / f), slurp(root / "b" / f)) << f;
    }
}

TEST(Report, TwoTemporalRunsShareOneOverlay) {
    const fs::path root = fresh_dir("report");
    RunConfig c = tiny(root);
    synth_into(c);
    std::ostringstream log;
    c.out = (root / "pinn").string();
    cmd_train_temporal(c, log);
    c.temporal.baseline = true;
    c.out = (root / "base").string();
    cmd_train_temporal(c, log);
    const ReportSummary s = cmd_report({root / "pinn", root / "base"}, root / "rep", log);
    EXPECT_EQ(s.included.size(), 2u);
    EXPECT_TRUE(s.skipped.empty());
    ASSERT_EQ(s.plots, std::vector<std::string>{"temporal.svg"});
    const std::string svg = slurp(root / "rep" / "temporal.svg");
    EXPECT_NE(svg.find("data-label=\"pinn (temporal)\""), std::string::npos);
    EXPECT_NE(svg.find("data-label=\"base (baseline)\""), std::string::npos);
    EXPECT_NE(svg.find("data-label=\"oracle\""), std::string::npos);
    EXPECT_NE(svg.find("class=\"marker\" data-x=\"6\""), std::string::npos);
    const std::string table = slurp(root / "rep" / "summary.txt");
    EXPECT_NE(table.find("pinn"), std::string::npos);
    EXPECT_NE(table.find("baseline"), std::string::npos);

    // Regeneration from the same inputs is byte-identical.
    cmd_report({root / "pinn", root / "base"}, root / "rep2", log);
    EXPECT_EQ(slurp(root / "rep2" / "temporal.svg"), svg);
    EXPECT_EQ(slurp(root / "rep2" / "summary.txt"), table);
}

TEST(Report, EmptyInputGivesEmptyTableAndWarning) {
    const fs::path root = fresh_dir("report_empty");
    std::ostringstream log;
    const ReportSummary s = cmd_report({}, root / "rep", log);
    EXPECT_TRUE(s.included.empty());
    EXPECT_TRUE(s.plots.empty());
    EXPECT_NE(log.str().find("warning"), std::string::npos);
    EXPECT_EQ(lines(root / "rep" / "summary.txt").size(), 1u);
}

TEST(Report, RunsWithoutMetricsAreSkipped) {
    const fs::path root = fresh_dir("report_skip");
    fs::create_directories(root / "junk");
    std::ostringstream log;
    const ReportSummary s = cmd_report({root / "junk"}, root / "rep", log);
    EXPECT_EQ(s.skipped.size(), 1u);
    EXPECT_NE(log.str().find("skipped"), std::string::npos);
    EXPECT_NE(slurp(root / "rep" / "summary.txt").find("skipped"), std::string::npos);
}

TEST(ExitCodes, DistinctPerErrorKind) {
    EXPECT_EQ(exit_code_for(ConfigError("x")), kExitConfig);
    EXPECT_EQ(exit_code_for(DataError("x")), kExitData);
    EXPECT_EQ(exit_code_for(datagen::ParseError("x", 2)), kExitData);
    EXPECT_EQ(exit_code_for(datagen::ValidationError("x")), kExitData);
    EXPECT_EQ(exit_code_for(DivergedError("x")), kExitDiverged);
    EXPECT_EQ(exit_code_for(IoError("x")), kExitIo);
    EXPECT_EQ(exit_code_for(std::runtime_error("x")), kExitUsage);
}

TEST(Median, OddAndEven) {
    EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
    EXPECT_THROW(median({}), std::invalid_argument);
}

#include "pinn/app.hpp"

#include "pinn/network.hpp"
#include "pinn/oracle.hpp"
#include "pinn/spatial.hpp"
#include "pinn/svg.hpp"
#include "pinn/temporal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace pinn::app {

using nlohmann::json;
using datagen::format_double;

// ---------------------------------------------------------------------------
// Configuration

double SpatialConfig::w_exp_t() const {
    switch (scenario) {
    case 1: return 0.0;
    case 3: return 0.01;
    default: return 1.0;
    }
}

RunConfig::RunConfig() {
    temporal.optim = temporal::default_optim();
    spatial.optim = spatial::default_optim();
}

namespace {

/// Reads keys of one object and remembers which were consumed so leftovers
/// can be reported as unknown.
class Section {
  public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(label() + ": expected an object");
    }

    void number(const char* key, double& v) {
        if (const json* e = take(key)) {
            if (!e->is_number()) fail(key, "expected a number");
            v = e->get<double>();
        }
    }
    void integer(const char* key, int& v) {
        if (const json* e = take(key)) {
            if (!e->is_number_integer()) fail(key, "expected an integer");
            v = e->get<int>();
        }
    }
    void unsigned_integer(const char* key, std::uint64_t& v) {
        if (const json* e = take(key)) {
            if (!e->is_number_unsigned()) fail(key, "expected a non-negative integer");
            v = e->get<std::uint64_t>();
        }
    }
    void boolean(const char* key, bool& v) {
        if (const json* e = take(key)) {
            if (!e->is_boolean()) fail(key, "expected true or false");
            v = e->get<bool>();
        }
    }
    void string(const char* key, std::string& v) {
        if (const json* e = take(key)) {
            if (!e->is_string()) fail(key, "expected a string");
            v = e->get<std::string>();
        }
    }
    void integers(const char* key, std::vector<int>& v) {
        if (const json* e = take(key)) {
            if (!e->is_array()) fail(key, "expected an array of integers");
            v.clear();
            for (const auto& x : *e) {
                if (!x.is_number_integer()) fail(key, "expected an array of integers");
                v.push_back(x.get<int>());
            }
        }
    }
    void pair(const char* key, std::array<double, 2>& v) {
        if (const json* e = take(key)) {
            if (!e->is_array() || e->size() != 2 || !(*e)[0].is_number() || !(*e)[1].is_number()) {
                fail(key, "expected an array of two numbers");
            }
            v = {(*e)[0].get<double>(), (*e)[1].get<double>()};
        }
    }
    /// Nested object; `fn` receives its Section. Missing keys leave defaults.
    void object(const char* key, const std::function<void(Section&)>& fn) {
        if (const json* e = take(key)) {
            Section s(*e, path_.empty() ? key : path_ + "." + key);
            fn(s);
            s.finish();
        }
    }
    const json* take(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    void finish() const {
        for (const auto& [k, _] : j_.items()) {
            if (!seen_.count(k)) {
                throw ConfigError("unknown config key '" + (path_.empty() ? k : path_ + "." + k) + "'");
            }
        }
    }
    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError("config key '" + (path_.empty() ? key : path_ + "." + key) + "': " + what);
    }

  private:
    std::string label() const { return path_.empty() ? "config" : "config key '" + path_ + "'"; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_optim(Section& s, optim::OptimConfig& o) {
    s.number("adam_lr", o.adam_lr);
    s.integer("adam_epochs", o.adam_epochs);
    s.number("adam_beta1", o.adam_beta1);
    s.number("adam_beta2", o.adam_beta2);
    s.number("adam_eps", o.adam_eps);
    s.integer("lbfgs_memory", o.lbfgs_memory);
    s.integer("lbfgs_max_iters", o.lbfgs_max_iters);
    s.number("wolfe_c1", o.wolfe_c1);
    s.number("wolfe_c2", o.wolfe_c2);
    s.number("grad_tol", o.grad_tol);
    s.number("ftol_rel", o.ftol_rel);
    s.integer("max_line_search_evals", o.max_line_search_evals);
}

json optim_json(const optim::OptimConfig& o) {
    return {{"adam_lr", o.adam_lr},
            {"adam_epochs", o.adam_epochs},
            {"adam_beta1", o.adam_beta1},
            {"adam_beta2", o.adam_beta2},
            {"adam_eps", o.adam_eps},
            {"lbfgs_memory", o.lbfgs_memory},
            {"lbfgs_max_iters", o.lbfgs_max_iters},
            {"wolfe_c1", o.wolfe_c1},
            {"wolfe_c2", o.wolfe_c2},
            {"grad_tol", o.grad_tol},
            {"ftol_rel", o.ftol_rel},
            {"max_line_search_evals", o.max_line_search_evals}};
}

} // namespace

RunConfig config_from_json(const json& j) {
    RunConfig c;
    Section root(j, "");
    root.string("out", c.out);
    root.string("data_dir", c.data_dir);
    root.unsigned_integer("seed", c.seed);
    root.integer("seeds", c.seeds);
    root.boolean("wall_time", c.wall_time);

    root.object("synth", [&](Section& s) {
        auto& y = c.synth;
        s.number("omega_sq", y.omega_sq);
        s.number("amplitude", y.amplitude);
        s.number("duration", y.duration);
        s.number("rate", y.rate);
        s.number("temporal_sigma", y.temporal_sigma);
        s.unsigned_integer("temporal_seed", y.temporal_seed);
        s.number("fiber_sigma", y.fiber_sigma);
        s.unsigned_integer("fiber_seed", y.fiber_seed);
        s.number("cover", y.cover);
        s.integer("n_compression", y.n_compression);
        s.integer("n_tension", y.n_tension);
        s.number("tension_factor", y.crack.tension_factor);
        if (const json* cracks = s.take("cracks")) {
            if (!cracks->is_array()) s.fail("cracks", "expected an array");
            y.crack.intervals.clear();
            for (std::size_t i = 0; i < cracks->size(); ++i) {
                Section cs((*cracks)[i], "synth.cracks[" + std::to_string(i) + "]");
                datagen::CrackInterval iv{0.0, 0.0, 0.0};
                cs.number("x_begin", iv.x_begin);
                cs.number("x_end", iv.x_end);
                cs.number("factor", iv.factor);
                cs.finish();
                y.crack.intervals.push_back(iv);
            }
        }
    });

    root.object("beam", [&](Section& s) {
        auto& b = c.beam;
        s.number("length", b.geometry.length);
        s.number("height", b.geometry.height);
        s.number("thickness", b.geometry.thickness);
        s.number("youngs_modulus", b.material.youngs_modulus);
        s.number("poisson_ratio", b.material.poisson_ratio);
        std::string plane = spatial::plane_assumption_name(b.material.assumption);
        s.string("plane", plane);
        try {
            b.material.assumption = spatial::parse_plane_assumption(plane);
        } catch (const std::exception& e) {
            s.fail("plane", e.what());
        }
        s.number("total_load", b.layout.total_load);
        s.number("load_x", b.layout.load_x);
        s.number("support_x", b.layout.support_x);
        s.number("patch_width", b.layout.patch_width);
        s.pair("body_force", b.body_force);
    });

    root.object("temporal", [&](Section& s) {
        auto& t = c.temporal;
        s.integers("hidden", t.hidden);
        s.boolean("baseline", t.baseline);
        s.number("t_train", t.t_train);
        s.number("t_min", t.t_min);
        s.number("t_max", t.t_max);
        s.integer("n_collocation", t.n_collocation);
        s.number("w_ode", t.w_ode);
        s.number("w_data", t.w_data);
        s.number("omega_sq", t.omega_sq);
        s.number("omega_init", t.omega_init);
        s.number("time_scale", t.time_scale);
        s.number("strain_scale", t.strain_scale);
        s.number("prediction_step", t.prediction_step);
        s.object("optim", [&](Section& o) { read_optim(o, t.optim); });
    });

    root.object("spatial", [&](Section& s) {
        auto& p = c.spatial;
        s.integers("hidden", p.hidden);
        s.integer("scenario", p.scenario);
        s.integer("n_interior", p.n_interior);
        s.integer("per_edge", p.per_edge);
        s.unsigned_integer("collocation_seed", p.collocation_seed);
        s.number("w_pde", p.w_pde);
        s.number("w_bc", p.w_bc);
        s.number("w_exp_c", p.w_exp_c);
        s.number("w_rot", p.w_rot);
        s.boolean("paper_faithful", p.paper_faithful);
        s.integer("grid_nx", p.grid_nx);
        s.integer("grid_ny", p.grid_ny);
        // The tension weight follows from the scenario; an explicit value
        // must agree with it.
        double w_t = p.w_exp_t();
        s.number("w_exp_t", w_t);
        if (w_t != p.w_exp_t()) {
            s.fail("w_exp_t", "scenario " + std::to_string(p.scenario) + " fixes the tension weight to " +
                                  format_double(p.w_exp_t()));
        }
        s.object("optim", [&](Section& o) { read_optim(o, p.optim); });
    });

    root.finish();
    c.validate();
    return c;
}

json config_to_json(const RunConfig& c) {
    json cracks = json::array();
    for (const auto& iv : c.synth.crack.intervals) {
        cracks.push_back({{"x_begin", iv.x_begin}, {"x_end", iv.x_end}, {"factor", iv.factor}});
    }
    const auto& b = c.beam;
    const auto& t = c.temporal;
    const auto& p = c.spatial;
    json spatial{{"hidden", p.hidden},
                 {"scenario", p.scenario},
                 {"n_interior", p.n_interior},
                 {"per_edge", p.per_edge},
                 {"collocation_seed", p.collocation_seed},
                 {"w_pde", p.w_pde},
                 {"w_bc", p.w_bc},
                 {"w_exp_c", p.w_exp_c},
                 {"w_rot", p.w_rot},
                 {"paper_faithful", p.paper_faithful},
                 {"grid_nx", p.grid_nx},
                 {"grid_ny", p.grid_ny},
                 {"optim", optim_json(p.optim)}};
    if (p.scenario != 1) spatial["w_exp_t"] = p.w_exp_t();

    return {{"out", c.out},
            {"data_dir", c.data_dir},
            {"seed", c.seed},
            {"seeds", c.seeds},
            {"wall_time", c.wall_time},
            {"synth",
             {{"omega_sq", c.synth.omega_sq},
              {"amplitude", c.synth.amplitude},
              {"duration", c.synth.duration},
              {"rate", c.synth.rate},
              {"temporal_sigma", c.synth.temporal_sigma},
              {"temporal_seed", c.synth.temporal_seed},
              {"fiber_sigma", c.synth.fiber_sigma},
              {"fiber_seed", c.synth.fiber_seed},
              {"cover", c.synth.cover},
              {"n_compression", c.synth.n_compression},
              {"n_tension", c.synth.n_tension},
              {"tension_factor", c.synth.crack.tension_factor},
              {"cracks", cracks}}},
            {"beam",
             {{"length", b.geometry.length},
              {"height", b.geometry.height},
              {"thickness", b.geometry.thickness},
              {"youngs_modulus", b.material.youngs_modulus},
              {"poisson_ratio", b.material.poisson_ratio},
              {"plane", spatial::plane_assumption_name(b.material.assumption)},
              {"total_load", b.layout.total_load},
              {"load_x", b.layout.load_x},
              {"support_x", b.layout.support_x},
              {"patch_width", b.layout.patch_width},
              {"body_force", b.body_force}}},
            {"temporal",
             {{"hidden", t.hidden},
              {"baseline", t.baseline},
              {"t_train", t.t_train},
              {"t_min", t.t_min},
              {"t_max", t.t_max},
              {"n_collocation", t.n_collocation},
              {"w_ode", t.w_ode},
              {"w_data", t.w_data},
              {"omega_sq", t.omega_sq},
              {"omega_init", t.omega_init},
              {"time_scale", t.time_scale},
              {"strain_scale", t.strain_scale},
              {"prediction_step", t.prediction_step},
              {"optim", optim_json(t.optim)}}},
            {"spatial", spatial}};
}

void RunConfig::validate() const {
    auto check = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError("invalid config: " + what);
    };
    check(!out.empty(), "out must not be empty");
    check(!data_dir.empty(), "data_dir must not be empty");
    check(seeds >= 1, "seeds must be >= 1");
    check(synth.duration > 0.0 && synth.rate > 0.0, "synth duration and rate must be > 0");
    check(synth.temporal_sigma >= 0.0 && synth.fiber_sigma >= 0.0, "noise sigma must be >= 0");
    check(synth.n_compression >= 2 && synth.n_tension >= 2, "fiber scans need at least two points");
    check(synth.cover > 0.0 && 2.0 * synth.cover < beam.geometry.height, "fiber cover must lie inside the section");
    check(!temporal.hidden.empty() && !spatial.hidden.empty(), "hidden layer lists must not be empty");
    for (int w : temporal.hidden) check(w > 0, "temporal hidden widths must be > 0");
    for (int w : spatial.hidden) check(w > 0, "spatial hidden widths must be > 0");
    check(temporal.t_min < temporal.t_max, "temporal t_min must be < t_max");
    check(temporal.t_train > temporal.t_min && temporal.t_train <= temporal.t_max,
          "temporal t_train must lie in (t_min, t_max]");
    check(temporal.n_collocation >= 2, "temporal n_collocation must be >= 2");
    check(temporal.w_ode >= 0.0 && temporal.w_data >= 0.0, "temporal weights must be >= 0");
    check(temporal.omega_sq >= 0.0 && temporal.omega_init > 0.0, "omega_sq >= 0 and omega_init > 0 required");
    check(temporal.time_scale > 0.0 && temporal.strain_scale > 0.0, "temporal scales must be > 0");
    check(temporal.prediction_step > 0.0, "temporal prediction_step must be > 0");
    check(spatial.scenario >= 1 && spatial.scenario <= 3, "spatial scenario must be 1, 2 or 3");
    check(spatial.n_interior >= 2 && spatial.n_interior % 2 == 0, "spatial n_interior must be even and >= 2");
    check(spatial.per_edge >= 1, "spatial per_edge must be >= 1");
    check(spatial.w_pde >= 0.0 && spatial.w_bc >= 0.0 && spatial.w_exp_c >= 0.0 && spatial.w_rot >= 0.0,
          "spatial weights must be >= 0");
    check(spatial.grid_nx >= 1 && spatial.grid_ny >= 1, "spatial grid must have at least one cell");
    try {
        temporal.optim.validate();
        spatial.optim.validate();
        beam.geometry.validate();
        beam.material.validate();
        beam.layout.validate(beam.geometry);
        synth.crack.validate(beam.geometry);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

RunConfig load_config(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(is, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os << text;
    os.close();
    if (!os) throw IoError("write to '" + path.string() + "' failed");
}

std::string read_text(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string file_hash(const fs::path& path) { return hex64(datagen::fnv1a(read_text(path))); }

} // namespace

void write_json(const json& j, const fs::path& path) { write_text(path, j.dump(2) + "\n"); }

std::string config_hash(const RunConfig& c) { return hex64(datagen::fnv1a(config_to_json(c).dump())); }

void apply_overrides(RunConfig& c, const Overrides& o) {
    if (o.out) c.out = *o.out;
    if (o.data_dir) c.data_dir = *o.data_dir;
    if (o.seed) c.seed = *o.seed;
    if (o.seeds) c.seeds = *o.seeds;
    if (o.scenario) c.spatial.scenario = *o.scenario;
    if (o.noise_sigma) {
        c.synth.temporal_sigma = *o.noise_sigma;
        c.synth.fiber_sigma = *o.noise_sigma;
    }
    if (o.baseline) c.temporal.baseline = true;
    if (o.paper_faithful) c.spatial.paper_faithful = true;
    if (o.wall_time) c.wall_time = true;
    c.validate();
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of an empty sequence");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const datagen::ParseError*>(&e) ||
        dynamic_cast<const datagen::ValidationError*>(&e)) {
        return kExitData;
    }
    if (dynamic_cast<const DivergedError*>(&e)) return kExitDiverged;
    if (dynamic_cast<const IoError*>(&e)) return kExitIo;
    return kExitUsage;
}

// ---------------------------------------------------------------------------
// Shared run plumbing

namespace {

struct Provenance {
    json inputs = json::object();
    json outputs = json::object();

    void input(const fs::path& p) { inputs[p.filename().string()] = file_hash(p); }
    void output(const fs::path& p) { outputs[p.filename().string()] = file_hash(p); }
};

void write_provenance(const RunConfig& c, const std::string& command, const Provenance& prov,
                      const fs::path& dir) {
    json j{{"command", command},
           {"config_hash", config_hash(c)},
           {"seed", c.seed},
           {"inputs", prov.inputs},
           {"outputs", prov.outputs}};
    write_json(j, dir / kProvenanceFile);
}

template <class Row>
void write_csv(const fs::path& path, const std::string& header, std::size_t n, Row row) {
    std::string text = header + "\n";
    for (std::size_t i = 0; i < n; ++i) text += row(i) + "\n";
    write_text(path, text);
}

void write_history(const optim::TrainHistory& h, const fs::path& path, bool wall_time) {
    std::ostringstream os;
    h.write_csv(os, wall_time);
    write_text(path, os.str());
}

void write_params(const network::MlpSpec& spec, const network::ParamStore& params, const fs::path& path) {
    std::ostringstream os;
    network::save_params(os, spec, params);
    write_text(path, os.str());
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Runs `one` for each seed. A single seed writes straight into c.out;
/// several seeds write to seed_<n> subdirectories plus aggregate.json.
void fan_out(const RunConfig& c, std::ostream& log,
             const std::function<json(const RunConfig&, std::ostream&)>& one) {
    if (c.seeds == 1) {
        one(c, log);
        return;
    }
    const fs::path root(c.out);
    ensure_dir(root);
    write_json(config_to_json(c), root / kConfigFile);

    std::vector<RunConfig> runs;
    for (int k = 0; k < c.seeds; ++k) {
        RunConfig r = c;
        r.seed = c.seed + static_cast<std::uint64_t>(k);
        r.seeds = 1;
        r.out = (root / ("seed_" + std::to_string(r.seed))).string();
        runs.push_back(std::move(r));
    }

    // Independent single-threaded runs, at most one per hardware thread.
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<json> metrics(runs.size());
    std::vector<std::string> errors(runs.size());
    std::vector<bool> diverged(runs.size(), false);
    std::mutex log_mutex;
    for (std::size_t begin = 0; begin < runs.size(); begin += workers) {
        std::vector<std::future<void>> jobs;
        for (std::size_t i = begin; i < std::min(runs.size(), begin + workers); ++i) {
            jobs.push_back(std::async(std::launch::async, [&, i] {
                std::ostringstream buf;
                try {
                    metrics[i] = one(runs[i], buf);
                } catch (const DivergedError& e) {
                    diverged[i] = true;
                    errors[i] = e.what();
                }
                std::lock_guard<std::mutex> lock(log_mutex);
                log << buf.str();
            }));
        }
        for (auto& j : jobs) j.get();
    }

    json agg{{"seeds", json::array()}, {"runs", json::array()}, {"median", json::object()}};
    std::map<std::string, std::vector<double>> values;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        agg["seeds"].push_back(runs[i].seed);
        agg["runs"].push_back(fs::path(runs[i].out).filename().string());
        if (diverged[i]) continue;
        for (const auto& [k, v] : metrics[i].items()) {
            if (v.is_number() && k != "seed") values[k].push_back(v.get<double>());
        }
    }
    for (const auto& [k, v] : values) {
        if (v.size() == runs.size()) agg["median"][k] = median(v);
    }
    write_json(agg, root / "aggregate.json");
    log << "aggregate over " << runs.size() << " seeds written to " << (root / "aggregate.json").string() << "\n";

    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (diverged[i]) throw DivergedError("seed " + std::to_string(runs[i].seed) + ": " + errors[i]);
    }
}

// ---------------------------------------------------------------------------
// Data loading

fs::path require_file(const RunConfig& c, const char* name) {
    const fs::path p = fs::path(c.data_dir) / name;
    if (!fs::exists(p)) {
        throw DataError("missing dataset: expected '" + p.string() + "' (run 'synth' or set data_dir)");
    }
    return p;
}

datagen::SensorSeries load_series(const fs::path& p) {
    try {
        return datagen::load_series_csv(p);
    } catch (const datagen::ParseError& e) {
        throw DataError(e.what());
    } catch (const datagen::ValidationError& e) {
        throw DataError(p.string() + ": " + e.what());
    }
}

datagen::FiberScan load_fiber(const fs::path& p, datagen::FiberId id, const spatial::Geometry& g) {
    try {
        datagen::FiberScan s = datagen::load_fiber_csv(p, id);
        s.validate(g);
        return s;
    } catch (const datagen::ParseError& e) {
        throw DataError(e.what());
    } catch (const datagen::ValidationError& e) {
        throw DataError(p.string() + ": " + e.what());
    }
}

} // namespace

// ---------------------------------------------------------------------------
// synth

void cmd_synth(const RunConfig& c, std::ostream& log) {
    c.validate();
    const auto& y = c.synth;
    const std::string hash = config_hash(c);

    datagen::SensorSeries series = datagen::synth_temporal(y.omega_sq, y.amplitude, y.duration, y.rate,
                                                           {y.temporal_sigma, y.temporal_seed});
    series.provenance = "synthetic:" + hash;

    datagen::FiberLayout fibers = datagen::FiberLayout::for_geometry(c.beam.geometry, y.cover);
    fibers.n_compression = y.n_compression;
    fibers.n_tension = y.n_tension;
    const datagen::FiberScans scans = datagen::synth_fiber_scans(
        c.beam.geometry, c.beam.material, c.beam.layout, fibers, {y.fiber_sigma, y.fiber_seed}, y.crack);

    const fs::path dir(c.out);
    ensure_dir(dir);
    Provenance prov;
    const fs::path files[3] = {dir / kTemporalFile, dir / kFiber1File, dir / kFiber2File};
    try {
        datagen::save_csv(series, files[0]);
        datagen::save_csv(scans.compression, files[1]);
        datagen::save_csv(scans.tension, files[2]);
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }
    for (const auto& f : files) prov.output(f);

    const json resolved = config_to_json(c);
    json j{{"command", "synth"},
           {"kind", "synthetic"},
           {"config_hash", hash},
           {"synth", resolved["synth"]},
           {"beam", resolved["beam"]},
           {"outputs", prov.outputs}};
    write_json(j, dir / kProvenanceFile);
    write_json(resolved, dir / kConfigFile);
    log << "synth: wrote " << series.samples.size() << " sensor samples, " << scans.compression.points.size()
        << " + " << scans.tension.points.size() << " fiber points to " << dir.string() << "\n";
}

// ---------------------------------------------------------------------------
// Temporal commands

namespace {

struct TemporalRun {
    temporal::TrainResult result;
    json metrics;
};

temporal::TemporalProblem temporal_problem(const RunConfig& c, const datagen::SensorSeries& train,
                                           bool identify) {
    const auto& t = c.temporal;
    temporal::TemporalProblem p;
    p.omega_sq = t.omega_sq;
    p.omega_trainable = identify;
    p.omega_init = t.omega_init;
    p.data = train;
    p.w_ode = t.w_ode;
    p.w_data = t.w_data;
    p.t_min = t.t_min;
    p.t_max = t.t_max;
    p.time_scale = t.time_scale;
    p.strain_scale = t.strain_scale;
    if (t.baseline && !identify) {
        p.w_ode = 0.0;
    } else {
        p.collocation = temporal::uniform_collocation(t.t_min, t.t_max, t.n_collocation);
    }
    return p;
}

/// Shared body of train-temporal and identify-omega.
TemporalRun run_temporal(const RunConfig& c, bool identify, std::ostream& log, const char* command) {
    const fs::path data_path = require_file(c, kTemporalFile);
    const datagen::SensorSeries series = load_series(data_path);
    if (series.samples.empty()) throw DataError(data_path.string() + ": no samples");
    if (c.temporal.t_train < series.samples.front().t || c.temporal.t_train > series.samples.back().t) {
        throw DataError(data_path.string() + ": t_train outside the recorded time span");
    }
    const datagen::SeriesSplit split = datagen::split_train_window(series, c.temporal.t_train);
    if (split.train.samples.empty()) throw DataError(data_path.string() + ": empty training window");

    const bool baseline = c.temporal.baseline && !identify;
    const temporal::TemporalProblem problem = temporal_problem(c, split.train, identify);
    const network::Activation act = baseline ? network::Activation::sin : network::Activation::tanh;
    const temporal::TemporalModel model = temporal::make_model(problem, act, c.seed, c.temporal.hidden);

    const fs::path dir(c.out);
    ensure_dir(dir);
    write_json(config_to_json(c), dir / kConfigFile);

    const auto t0 = std::chrono::steady_clock::now();
    TemporalRun run;
    run.result = temporal::train_temporal(problem, model, c.temporal.optim);
    const double wall = elapsed(t0);
    const auto& trained = run.result.model;

    Provenance prov;
    prov.input(data_path);
    const fs::path params_path = dir / "params.txt";
    const fs::path history_path = dir / "history.csv";
    const fs::path pred_path = dir / "prediction.csv";
    write_params(trained.spec, trained.params, params_path);
    write_history(run.result.history, history_path, c.wall_time);

    std::vector<double> grid;
    const double step = c.temporal.prediction_step;
    const int n_grid = static_cast<int>(std::floor((c.temporal.t_max - c.temporal.t_min) / step + 1e-9)) + 1;
    for (int i = 0; i < n_grid; ++i) grid.push_back(c.temporal.t_min + i * step);
    const std::vector<double> pred = temporal::predict_strain(trained, grid);
    write_csv(pred_path, "t_s,strain_pred_microstrain", grid.size(),
              [&](std::size_t i) { return format_double(grid[i]) + "," + format_double(pred[i]); });
    for (const auto& p : {params_path, history_path, pred_path}) prov.output(p);

    auto rel = [&](const datagen::SensorSeries& s) -> json {
        if (s.samples.empty()) return nullptr;
        std::vector<double> ts, ref;
        for (const auto& q : s.samples) {
            ts.push_back(q.t);
            ref.push_back(q.strain);
        }
        return temporal::relative_l2(temporal::predict_strain(trained, ts), ref);
    };
    const auto& last = run.result.history.records.back();
    run.metrics = {{"kind", identify ? "identify" : (baseline ? "baseline" : "temporal")},
                   {"activation", network::activation_name(act)},
                   {"seed", c.seed},
                   {"rel_l2_train", rel(split.train)},
                   {"rel_l2_extrap", rel(split.holdout)},
                   {"n_train", split.train.samples.size()},
                   {"n_holdout", split.holdout.samples.size()},
                   {"t_train", c.temporal.t_train},
                   {"final_loss", last.loss},
                   {"loss_ode", last.components.at(0)},
                   {"loss_data", last.components.at(1)},
                   {"records", run.result.history.records.size()},
                   {"status", optim::status_name(run.result.status)},
                   {"wall_time_s", wall}};
    if (identify) {
        run.metrics["omega_sq_initial"] = c.temporal.omega_init;
        run.metrics["omega_sq_final"] = trained.omega_sq(c.temporal.omega_sq);
        const fs::path traj_path = dir / "trajectory.csv";
        const auto& recs = run.result.history.records;
        write_csv(traj_path, "phase,iter,omega_sq", recs.size(), [&](std::size_t i) {
            return std::string(optim::phase_name(recs[i].phase)) + "," + std::to_string(recs[i].iteration) + "," +
                   format_double(recs[i].extras.at(0));
        });
        prov.output(traj_path);
    }
    write_json(run.metrics, dir / kMetricsFile);
    write_provenance(c, command, prov, dir);

    log << command << " seed " << c.seed << ": " << optim::status_name(run.result.status) << ", loss "
        << format_double(last.loss);
    if (!run.metrics["rel_l2_extrap"].is_null()) {
        log << ", rel_l2_extrap " << format_double(run.metrics["rel_l2_extrap"].get<double>());
    }
    if (identify) log << ", omega_sq " << format_double(run.metrics["omega_sq_final"].get<double>());
    log << " (" << std::fixed << std::setprecision(1) << wall << " s)" << std::defaultfloat << "\n";

    if (run.result.status == optim::Status::diverged) {
        throw DivergedError(std::string(command) + " diverged: " + run.result.message);
    }
    return run;
}

} // namespace

void cmd_train_temporal(const RunConfig& c, std::ostream& log) {
    c.validate();
    fan_out(c, log, [](const RunConfig& r, std::ostream& l) {
        return run_temporal(r, false, l, "train-temporal").metrics;
    });
}

void cmd_identify_omega(const RunConfig& c, std::ostream& log) {
    c.validate();
    fan_out(c, log, [](const RunConfig& r, std::ostream& l) {
        return run_temporal(r, true, l, "identify-omega").metrics;
    });
}

// ---------------------------------------------------------------------------
// Spatial command

namespace {

json relative_l2_json(const std::vector<double>& pred, const std::vector<double>& ref) {
    if (ref.empty()) return nullptr;
    return temporal::relative_l2(pred, ref);
}

std::vector<double> strains(const datagen::FiberScan& s) {
    std::vector<double> v;
    for (const auto& p : s.points) v.push_back(p.strain);
    return v;
}

double peak_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

json run_spatial(const RunConfig& c, std::ostream& log) {
    const auto& sc = c.spatial;
    const spatial::Geometry& g = c.beam.geometry;
    const fs::path f1_path = require_file(c, kFiber1File);
    const datagen::FiberScan compression = load_fiber(f1_path, datagen::FiberId::compression, g);
    if (compression.points.empty()) throw DataError(f1_path.string() + ": compression fiber has no points");

    const fs::path f2_path = fs::path(c.data_dir) / kFiber2File;
    datagen::FiberScan tension{datagen::FiberId::tension, {}};
    const bool have_tension = fs::exists(f2_path);
    if (have_tension) tension = load_fiber(f2_path, datagen::FiberId::tension, g);
    if (sc.scenario != 1 && spatial::undamaged(tension).points.empty()) {
        throw DataError("scenario " + std::to_string(sc.scenario) +
                        " needs undamaged tension data: expected '" + f2_path.string() + "'");
    }

    spatial::BeamSetup setup;
    setup.geometry = g;
    setup.material = c.beam.material;
    setup.layout = c.beam.layout;
    setup.body_force = c.beam.body_force;
    setup.counts = {sc.n_interior, sc.per_edge, sc.collocation_seed};
    spatial::SpatialProblem problem =
        spatial::make_beam_problem(setup, compression, tension, sc.scenario, !sc.paper_faithful);
    problem.weights.pde = sc.w_pde;
    problem.weights.bc = sc.w_bc;
    problem.weights.exp_c = sc.w_exp_c;
    problem.weights.rot = sc.paper_faithful ? 0.0 : sc.w_rot;
    problem.validate();
    const spatial::SpatialModel model =
        spatial::make_spatial_model(g, c.beam.material, c.seed, !sc.paper_faithful, sc.hidden);

    const fs::path dir(c.out);
    ensure_dir(dir);
    write_json(config_to_json(c), dir / kConfigFile);

    const auto t0 = std::chrono::steady_clock::now();
    const spatial::SpatialTrainResult r = spatial::train_spatial(problem, model, sc.optim);
    const double wall = elapsed(t0);

    Provenance prov;
    prov.input(f1_path);
    if (have_tension) prov.input(f2_path);
    const fs::path params_path = dir / "params.txt";
    const fs::path history_path = dir / "history.csv";
    const fs::path field_path = dir / "field.csv";
    write_params(r.model.spec, r.model.params, params_path);
    write_history(r.history, history_path, c.wall_time);

    const auto field = spatial::predict_field(r.model, spatial::field_grid(g, sc.grid_nx, sc.grid_ny));
    write_csv(field_path, "x_m,y_m,ux_m,uy_m,sxx_pa,syy_pa,sxy_pa,exx_microstrain", field.size(),
              [&](std::size_t i) {
                  const auto& f = field[i];
                  return format_double(f.x) + "," + format_double(f.y) + "," + format_double(f.ux) + "," +
                         format_double(f.uy) + "," + format_double(f.sxx) + "," + format_double(f.syy) + "," +
                         format_double(f.sxy) + "," + format_double(f.exx);
              });

    auto write_fiber = [&](const datagen::FiberScan& s, const std::vector<double>& pred, const char* name) {
        const fs::path p = dir / name;
        write_csv(p, "x_m,y_m,strain_pred_microstrain", s.points.size(), [&](std::size_t i) {
            return format_double(s.points[i].x) + "," + format_double(s.points[i].y) + "," + format_double(pred[i]);
        });
        prov.output(p);
    };
    const std::vector<double> pred1 = spatial::predict_fiber(r.model, compression);
    write_fiber(compression, pred1, "fiber1_pred.csv");

    Eigen::Matrix2Xd origin(2, 1);
    origin << 0.0, 0.0;
    const double center = spatial::predict_field(r.model, origin)[0].exx;

    const auto& last = r.history.records.back();
    json m{{"kind", "spatial"},
           {"seed", c.seed},
           {"scenario", sc.scenario},
           {"w_exp_t", problem.weights.exp_t},
           {"paper_faithful", sc.paper_faithful},
           {"rel_l2_fiber1", relative_l2_json(pred1, strains(compression))},
           {"peak_fiber1_data", peak_abs(strains(compression))},
           {"center_exx_microstrain", center},
           {"final_loss", last.loss},
           {"records", r.history.records.size()},
           {"status", optim::status_name(r.status)},
           {"wall_time_s", wall}};
    const auto& names = spatial::spatial_component_names();
    for (std::size_t k = 0; k < names.size(); ++k) m["loss_" + names[k]] = last.components.at(k);

    if (have_tension) {
        const std::vector<double> pred2 = spatial::predict_fiber(r.model, tension);
        write_fiber(tension, pred2, "fiber2_pred.csv");
        const datagen::FiberScan und = spatial::undamaged(tension);
        m["rel_l2_fiber2"] = relative_l2_json(spatial::predict_fiber(r.model, und), strains(und));
        m["rel_l2_fiber2_all"] = relative_l2_json(pred2, strains(tension));
        m["smoothness_fiber2"] = spatial::smoothness(pred2);
        m["peak_fiber2_pred"] = peak_abs(pred2);
        m["peak_fiber2_data"] = peak_abs(strains(tension));
        m["peak_ratio_fiber2"] = peak_abs(pred2) / peak_abs(strains(tension));
    }
    for (const auto& p : {params_path, history_path, field_path}) prov.output(p);
    write_json(m, dir / kMetricsFile);
    write_provenance(c, "train-spatial", prov, dir);

    log << "train-spatial scenario " << sc.scenario << " seed " << c.seed << ": " << optim::status_name(r.status)
        << ", loss " << format_double(last.loss) << ", fiber1 rel L2 "
        << format_double(m["rel_l2_fiber1"].get<double>());
    if (have_tension && !m["rel_l2_fiber2"].is_null()) {
        log << ", fiber2 rel L2 " << format_double(m["rel_l2_fiber2"].get<double>());
    }
    log << " (" << std::fixed << std::setprecision(1) << wall << " s)" << std::defaultfloat << "\n";

    if (r.status == optim::Status::diverged) throw DivergedError("train-spatial diverged: " + r.message);
    return m;
}

} // namespace

void cmd_train_spatial(const RunConfig& c, std::ostream& log) {
    c.validate();
    fan_out(c, log, run_spatial);
}

// ---------------------------------------------------------------------------
// report

namespace {

/// Numeric CSV columns by header name; empty when the file is unreadable.
std::map<std::string, std::vector<double>> read_columns(const fs::path& path) {
    std::map<std::string, std::vector<double>> cols;
    std::ifstream is(path);
    if (!is) return cols;
    std::string line;
    if (!std::getline(is, line)) return cols;
    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) names.push_back(cell);
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        for (std::size_t k = 0; k < names.size() && std::getline(ss, cell, ','); ++k) {
            try {
                cols[names[k]].push_back(std::stod(cell));
            } catch (const std::exception&) {
                cols[names[k]].push_back(std::nan(""));
            }
        }
    }
    return cols;
}

std::optional<json> read_json(const fs::path& path) {
    std::ifstream is(path);
    if (!is) return std::nullopt;
    try {
        return json::parse(is);
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

struct ReportRun {
    fs::path dir;
    std::string name;
    json metrics;
    std::optional<RunConfig> config;
};

std::string cell(const json& m, const char* key) {
    const auto it = m.find(key);
    if (it == m.end() || it->is_null()) return "-";
    if (it->is_number_float()) {
        std::ostringstream os;
        os << std::setprecision(4) << it->get<double>();
        return os.str();
    }
    if (it->is_string()) return it->get<std::string>();
    return it->dump();
}

void add_oracle_and_data(svg::Plot& plot, const RunConfig& c, std::ostream& log) {
    const fs::path data = fs::path(c.data_dir) / kTemporalFile;
    auto cols = read_columns(data);
    if (!cols.empty()) {
        plot.series.push_back({"data", cols["t_s"], cols["strain_microstrain"], "#7f7f7f", true, false});
    } else {
        log << "report: warning: no sensor data at '" << data.string() << "'\n";
    }
    const auto prov = read_json(fs::path(c.data_dir) / kProvenanceFile);
    if (prov && prov->value("kind", "") == "synthetic") {
        const auto& s = (*prov)["synth"];
        const double w = s.value("omega_sq", 0.0), a = s.value("amplitude", 0.0);
        svg::Series o{"oracle", {}, {}, "#000000", false, true};
        for (double t = c.temporal.t_min; t <= c.temporal.t_max + 1e-9; t += 0.01) {
            o.x.push_back(t);
            o.y.push_back(oracle::harmonic_exact(a, w, t));
        }
        plot.series.push_back(std::move(o));
    }
}

void add_fiber_reference(svg::Plot& plot, const RunConfig& c, const char* file, bool compression) {
    auto cols = read_columns(fs::path(c.data_dir) / file);
    if (!cols.empty()) plot.series.push_back({"data", cols["x_m"], cols["strain_microstrain"], "#7f7f7f", true, false});
    datagen::FiberLayout fl = datagen::FiberLayout::for_geometry(c.beam.geometry, c.synth.cover);
    const double y = compression ? fl.y_compression : fl.y_tension;
    svg::Series o{"Euler-Bernoulli", {}, {}, "#000000", false, true};
    const int n = 301;
    for (int i = 0; i < n; ++i) {
        const double x = -0.5 * c.beam.geometry.length + c.beam.geometry.length * i / (n - 1);
        o.x.push_back(x);
        o.y.push_back(oracle::euler_bernoulli_strain(c.beam.geometry, c.beam.material, c.beam.layout, x, y));
    }
    plot.series.push_back(std::move(o));
}

} // namespace

ReportSummary cmd_report(const std::vector<fs::path>& runs, const fs::path& out, std::ostream& log) {
    ReportSummary summary;
    std::vector<ReportRun> loaded;
    for (const auto& dir : runs) {
        const auto m = read_json(dir / kMetricsFile);
        if (!m || !m->is_object()) {
            log << "report: warning: no readable metrics in '" << dir.string() << "', skipped\n";
            summary.skipped.push_back(dir.string());
            continue;
        }
        ReportRun r{dir, dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string(),
                    *m, std::nullopt};
        try {
            r.config = load_config(dir / kConfigFile);
        } catch (const std::exception&) {
            log << "report: warning: no usable config in '" << dir.string() << "', plots omit this run\n";
        }
        summary.included.push_back(dir.string());
        loaded.push_back(std::move(r));
    }
    if (loaded.empty()) log << "report: warning: no runs with metrics\n";

    ensure_dir(out);
    static const char* keys[] = {"rel_l2_train",  "rel_l2_extrap",     "omega_sq_final", "rel_l2_fiber1",
                                 "rel_l2_fiber2", "smoothness_fiber2", "final_loss",     "wall_time_s"};
    std::ostringstream table;
    table << std::left << std::setw(24) << "run" << std::setw(10) << "kind" << std::setw(6) << "seed";
    for (const char* k : keys) table << std::setw(18) << k;
    table << "\n";
    for (const auto& r : loaded) {
        table << std::setw(24) << r.name << std::setw(10) << cell(r.metrics, "kind") << std::setw(6)
              << cell(r.metrics, "seed");
        for (const char* k : keys) table << std::setw(18) << cell(r.metrics, k);
        table << "\n";
    }
    for (const auto& s : summary.skipped) table << "skipped (no metrics): " << s << "\n";
    write_text(out / "summary.txt", table.str());

    auto kind_of = [](const ReportRun& r) { return r.metrics.value("kind", std::string()); };

    // Temporal overlay: predictions of every temporal and baseline run.
    svg::Plot tp{"Temporal prediction", "t [s]", "strain [microstrain]", {}, {}};
    const RunConfig* tref = nullptr;
    std::size_t color = 0;
    for (const auto& r : loaded) {
        const std::string k = kind_of(r);
        if (k != "temporal" && k != "baseline" && k != "identify") continue;
        auto cols = read_columns(r.dir / "prediction.csv");
        if (cols.empty()) continue;
        tp.series.push_back({r.name + " (" + k + ")", cols["t_s"], cols["strain_pred_microstrain"],
                             svg::palette(color++), false, false});
        if (!tref && r.config) tref = &*r.config;
    }
    if (!tp.series.empty()) {
        if (tref) {
            add_oracle_and_data(tp, *tref, log);
            tp.markers.push_back({tref->temporal.t_train, "training window"});
        }
        write_text(out / "temporal.svg", tp.render());
        summary.plots.push_back("temporal.svg");
    }

    svg::Plot op{"omega^2 identification", "record", "omega^2 [1/s^2]", {}, {}};
    color = 0;
    for (const auto& r : loaded) {
        if (kind_of(r) != "identify") continue;
        auto cols = read_columns(r.dir / "trajectory.csv");
        if (cols.empty()) continue;
        std::vector<double> idx(cols["omega_sq"].size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<double>(i);
        op.series.push_back({r.name, idx, cols["omega_sq"], svg::palette(color++), false, false});
    }
    if (!op.series.empty()) {
        write_text(out / "omega.svg", op.render());
        summary.plots.push_back("omega.svg");
    }

    for (int fiber : {1, 2}) {
        svg::Plot fp{"Fiber " + std::to_string(fiber) + " strain", "x [m]", "strain [microstrain]", {}, {}};
        const RunConfig* sref = nullptr;
        color = 0;
        for (const auto& r : loaded) {
            if (kind_of(r) != "spatial") continue;
            auto cols = read_columns(r.dir / ("fiber" + std::to_string(fiber) + "_pred.csv"));
            if (cols.empty()) continue;
            fp.series.push_back({r.name + " (S" + cell(r.metrics, "scenario") + ")", cols["x_m"],
                                 cols["strain_pred_microstrain"], svg::palette(color++), false, false});
            if (!sref && r.config) sref = &*r.config;
        }
        if (fp.series.empty()) continue;
        if (sref) add_fiber_reference(fp, *sref, fiber == 1 ? kFiber1File : kFiber2File, fiber == 1);
        const std::string name = "fiber" + std::to_string(fiber) + ".svg";
        write_text(out / name, fp.render());
        summary.plots.push_back(name);
    }

    log << "report: " << loaded.size() << " runs, " << summary.skipped.size() << " skipped, "
        << summary.plots.size() << " plots in " << out.string() << "\n";
    return summary;
}

} // namespace pinn::app

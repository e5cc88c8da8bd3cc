#pragma once

/// \file app.hpp
///
/// Experiment runner behind the command-line tool: run configuration,
/// dataset generation, training commands and reports.

#include "pinn/beam.hpp"
#include "pinn/datagen.hpp"
#include "pinn/optim.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinn::app {

namespace fs = std::filesystem;

enum ExitCode {
    kExitOk = 0,
    kExitUsage = 1,
    kExitConfig = 2,
    kExitData = 3,
    kExitDiverged = 4,
    kExitIo = 5,
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Missing or invalid input dataset.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Training stopped on a non-finite loss. Outputs written so far are kept.
class DivergedError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SynthConfig {
    double omega_sq = 9.87;
    double amplitude = -293.0;   ///< [microstrain]
    double duration = 16.0;      ///< [s]
    double rate = 10.0;          ///< [1/s]
    double temporal_sigma = 3.0; ///< [microstrain]
    std::uint64_t temporal_seed = 7;
    double fiber_sigma = 2.0;    ///< [microstrain]
    std::uint64_t fiber_seed = 11;
    double cover = 0.03;         ///< fiber distance from the top/bottom face [m]
    int n_compression = 200;
    int n_tension = 100;
    datagen::CrackModel crack = datagen::CrackModel::default_model();
};

struct BeamConfig {
    spatial::Geometry geometry;
    spatial::Material material;
    spatial::FourPointLayout layout;
    std::array<double, 2> body_force{0.0, 0.0}; ///< [N/m^3]
};

struct TemporalConfig {
    std::vector<int> hidden{30, 30, 30};
    bool baseline = false;
    double t_train = 6.0;
    double t_min = 0.0;
    double t_max = 16.0;
    int n_collocation = 200;
    double w_ode = 0.1;
    double w_data = 1.0;
    double omega_sq = 9.87;
    double omega_init = 1.0;
    double time_scale = 8.0;
    double strain_scale = 100.0;
    double prediction_step = 0.01; ///< [s]
    optim::OptimConfig optim;
};

struct SpatialConfig {
    std::vector<int> hidden{50, 50, 50, 50};
    int scenario = 1;
    int n_interior = 4000;
    int per_edge = 200;
    std::uint64_t collocation_seed = 1234;
    double w_pde = 1.0;
    double w_bc = 1.0;
    double w_exp_c = 1.0;
    double w_rot = 1e-2;
    bool paper_faithful = false;
    int grid_nx = 100;
    int grid_ny = 20;
    optim::OptimConfig optim;

    /// Tension data weight implied by the scenario: 0, 1 or 0.01.
    double w_exp_t() const;
};

struct RunConfig {
    std::string out = "out";
    std::string data_dir = "data";
    std::uint64_t seed = 0;
    int seeds = 1;
    bool wall_time = false;
    SynthConfig synth;
    BeamConfig beam;
    TemporalConfig temporal;
    SpatialConfig spatial;

    RunConfig();
    /// Throws ConfigError.
    void validate() const;
};

/// Unknown keys anywhere in the tree raise ConfigError naming the key path.
RunConfig config_from_json(const nlohmann::json& j);
/// Fully resolved tree; scenario 1 carries no tension weight.
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config(const fs::path& path);
void write_json(const nlohmann::json& j, const fs::path& path);
std::string config_hash(const RunConfig& c);

/// Command-line overrides applied on top of the file configuration.
struct Overrides {
    std::optional<std::string> out;
    std::optional<std::string> data_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> seeds;
    std::optional<int> scenario;
    std::optional<double> noise_sigma;
    bool baseline = false;
    bool paper_faithful = false;
    bool wall_time = false;
};
void apply_overrides(RunConfig& c, const Overrides& o);

/// Dataset file names inside a data directory.
inline constexpr const char* kTemporalFile = "temporal.csv";
inline constexpr const char* kFiber1File = "fiber1.csv";
inline constexpr const char* kFiber2File = "fiber2.csv";
inline constexpr const char* kProvenanceFile = "provenance.json";
inline constexpr const char* kMetricsFile = "metrics.json";
inline constexpr const char* kConfigFile = "config.json";

/// Writes temporal.csv, fiber1.csv, fiber2.csv and provenance.json into c.out.
void cmd_synth(const RunConfig& c, std::ostream& log);

/// The commands below honour c.seeds: with more than one seed every run goes
/// to <out>/seed_<n> and an aggregate.json of per-key medians is written.
void cmd_train_temporal(const RunConfig& c, std::ostream& log);
void cmd_identify_omega(const RunConfig& c, std::ostream& log);
void cmd_train_spatial(const RunConfig& c, std::ostream& log);

struct ReportSummary {
    std::vector<std::string> included;
    std::vector<std::string> skipped;
    std::vector<std::string> plots;
};

/// Summary table (summary.txt) and SVG overlays for the given run
/// directories. Directories without metrics are listed and skipped.
ReportSummary cmd_report(const std::vector<fs::path>& runs, const fs::path& out, std::ostream& log);

/// Maps an exception thrown by a command to its exit code.
int exit_code_for(const std::exception& e) noexcept;

/// Median of a non-empty sequence; the mean of the middle two when even.
double median(std::vector<double> v);

} // namespace pinn::app

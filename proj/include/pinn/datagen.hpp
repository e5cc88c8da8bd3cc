#pragma once

/// \file datagen.hpp
///
/// Synthetic stand-ins for the fiber-optic strain measurements, dataset
/// splitting and CSV input/output.

#include "pinn/beam.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinn::datagen {

/// Malformed CSV content; the message names the offending line.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// Well-formed content that violates a dataset invariant.
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct TimeSample {
    double t;      ///< [s]
    double strain; ///< [microstrain]
    bool operator==(const TimeSample&) const = default;
};

struct SensorSeries {
    std::vector<TimeSample> samples;
    double rate = 0.0;        ///< samples per second, 0 when unknown
    std::string provenance;   ///< "synthetic:<hash>" or "file:<path>"

    /// Strictly increasing times and, when rate > 0, spacing consistent with it.
    void validate() const;
    bool operator==(const SensorSeries& o) const { return samples == o.samples; }
};

struct FiberPoint {
    double x;      ///< [m]
    double y;      ///< [m]
    double strain; ///< [microstrain]
    bool damaged;
    bool operator==(const FiberPoint&) const = default;
};

enum class FiberId { compression = 1, tension = 2 };

struct FiberScan {
    FiberId fiber = FiberId::compression;
    std::vector<FiberPoint> points;

    void validate(const spatial::Geometry& geometry) const;
    bool operator==(const FiberScan& o) const { return fiber == o.fiber && points == o.points; }
};

struct NoiseModel {
    double sigma = 0.0; ///< [microstrain]
    std::uint64_t seed = 0;
};

struct CrackInterval {
    double x_begin;
    double x_end;
    double factor; ///< strain amplification inside the interval, > 1
};

/// Phenomenological damage on the tension side. Inside an interval the strain
/// is factor x the elastic value and the point is flagged damaged; elsewhere
/// the tension strain is scaled by `tension_factor` (smeared cracking).
struct CrackModel {
    std::vector<CrackInterval> intervals;
    double tension_factor = 1.0;

    void validate(const spatial::Geometry& geometry) const;
    const CrackInterval* find(double x) const noexcept;
    /// Default stand-in: cracks of width 0.15 m at x = +-0.4 m, factor 2.5,
    /// smeared tension factor 1.4.
    static CrackModel default_model();
};

SensorSeries synth_temporal(double omega_sq, double amplitude, double duration, double rate,
                            const NoiseModel& noise);

struct FiberLayout {
    double y_compression = 0.12; ///< h/2 - 0.03 m cover
    double y_tension = -0.12;    ///< -h/2 + 0.03 m cover
    int n_compression = 200;
    int n_tension = 100;

    static FiberLayout for_geometry(const spatial::Geometry& g, double cover = 0.03);
};

struct FiberScans {
    FiberScan compression;
    FiberScan tension;
};

FiberScans synth_fiber_scans(const spatial::Geometry& geometry, const spatial::Material& material,
                             const spatial::FourPointLayout& layout, const FiberLayout& fibers,
                             const NoiseModel& noise, const CrackModel& crack);

struct SeriesSplit {
    SensorSeries train;
    SensorSeries holdout;
};

/// Samples with t <= t_cut go to train, the rest to holdout.
SeriesSplit split_train_window(const SensorSeries& series, double t_cut);

// CSV schemas:
//   sensor series  t_s,strain_microstrain
//   fiber scan     x_m,y_m,strain_microstrain,damaged
void save_csv(const SensorSeries& series, const std::filesystem::path& path);
void save_csv(const FiberScan& scan, const std::filesystem::path& path);
SensorSeries load_series_csv(const std::filesystem::path& path);
FiberScan load_fiber_csv(const std::filesystem::path& path, FiberId fiber);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

/// FNV-1a, used to tag synthetic datasets with the hash of their configuration.
std::uint64_t fnv1a(const std::string& text);

} // namespace pinn::datagen

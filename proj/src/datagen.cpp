#include "pinn/datagen.hpp"

#include "pinn/oracle.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace pinn::datagen {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

void SensorSeries::validate() const {
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (!(samples[i].t > samples[i - 1].t)) {
            throw ValidationError("sensor series: time is not strictly increasing at sample " +
                                  std::to_string(i));
        }
        if (rate > 0.0) {
            const double dt = samples[i].t - samples[i - 1].t;
            if (std::abs(dt * rate - 1.0) > 1e-6) {
                throw ValidationError("sensor series: spacing inconsistent with rate at sample " +
                                      std::to_string(i));
            }
        }
    }
}

void FiberScan::validate(const spatial::Geometry& geometry) const {
    const double half = 0.5 * geometry.length;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].y != points.front().y) {
            throw ValidationError("fiber scan: y is not constant (point " + std::to_string(i) + ")");
        }
        if (points[i].x < -half || points[i].x > half) {
            throw ValidationError("fiber scan: x outside the beam (point " + std::to_string(i) + ")");
        }
    }
}

void CrackModel::validate(const spatial::Geometry& geometry) const {
    const double half = 0.5 * geometry.length;
    if (!(tension_factor > 0.0)) throw std::invalid_argument("crack model: tension_factor must be > 0");
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto& a = intervals[i];
        if (!(a.x_begin < a.x_end) || a.x_begin < -half || a.x_end > half) {
            throw std::invalid_argument("crack model: interval outside the span");
        }
        if (!(a.factor > 1.0)) throw std::invalid_argument("crack model: factor must be > 1");
        for (std::size_t j = 0; j < i; ++j) {
            const auto& b = intervals[j];
            if (a.x_begin < b.x_end && b.x_begin < a.x_end) {
                throw std::invalid_argument("crack model: intervals overlap");
            }
        }
    }
}

const CrackInterval* CrackModel::find(double x) const noexcept {
    for (const auto& c : intervals) {
        if (x >= c.x_begin && x <= c.x_end) return &c;
    }
    return nullptr;
}

CrackModel CrackModel::default_model() {
    CrackModel m;
    m.intervals = {{-0.475, -0.325, 2.5}, {0.325, 0.475, 2.5}};
    m.tension_factor = 1.4;
    return m;
}

SensorSeries synth_temporal(double omega_sq, double amplitude, double duration, double rate,
                            const NoiseModel& noise) {
    if (!(duration > 0.0) || !(rate > 0.0)) {
        throw std::invalid_argument("synth_temporal: duration and rate must be > 0");
    }
    if (noise.sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");
    const auto count = static_cast<std::size_t>(std::floor(duration * rate)) + 1;
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    SensorSeries s;
    s.rate = rate;
    s.samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / rate;
        double e = oracle::harmonic_exact(amplitude, omega_sq, t);
        if (noise.sigma > 0.0) e += noise.sigma * gauss(rng);
        s.samples.push_back({t, e});
    }
    return s;
}

FiberLayout FiberLayout::for_geometry(const spatial::Geometry& g, double cover) {
    FiberLayout f;
    f.y_compression = 0.5 * g.height - cover;
    f.y_tension = -0.5 * g.height + cover;
    return f;
}

FiberScans synth_fiber_scans(const spatial::Geometry& geometry, const spatial::Material& material,
                             const spatial::FourPointLayout& layout, const FiberLayout& fibers,
                             const NoiseModel& noise, const CrackModel& crack) {
    geometry.validate();
    material.validate();
    crack.validate(geometry);
    const double half_h = 0.5 * geometry.height;
    for (double y : {fibers.y_compression, fibers.y_tension}) {
        if (!(y > -half_h && y < half_h)) {
            throw std::invalid_argument("fiber positions must lie inside the cross-section");
        }
    }
    if (fibers.n_compression < 2 || fibers.n_tension < 2) {
        throw std::invalid_argument("fiber scans need at least two points");
    }
    if (noise.sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");

    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double half = 0.5 * geometry.length;

    auto scan = [&](FiberId id, double y, int count, bool cracked) {
        FiberScan s;
        s.fiber = id;
        s.points.reserve(count);
        for (int i = 0; i < count; ++i) {
            const double x = -half + geometry.length * static_cast<double>(i) / (count - 1);
            double e = oracle::euler_bernoulli_strain(geometry, material, layout, x, y);
            bool damaged = false;
            if (cracked) {
                if (const CrackInterval* c = crack.find(x)) {
                    e *= c->factor;
                    damaged = true;
                } else {
                    e *= crack.tension_factor;
                }
            }
            if (noise.sigma > 0.0) e += noise.sigma * gauss(rng);
            s.points.push_back({x, y, e, damaged});
        }
        return s;
    };
    FiberScans out;
    out.compression = scan(FiberId::compression, fibers.y_compression, fibers.n_compression, false);
    out.tension = scan(FiberId::tension, fibers.y_tension, fibers.n_tension, true);
    return out;
}

SeriesSplit split_train_window(const SensorSeries& series, double t_cut) {
    if (series.samples.empty() || t_cut < series.samples.front().t ||
        t_cut > series.samples.back().t) {
        throw std::invalid_argument("split_train_window: cut time outside the series span");
    }
    SeriesSplit out;
    out.train.rate = out.holdout.rate = series.rate;
    out.train.provenance = out.holdout.provenance = series.provenance;
    for (const auto& s : series.samples) (s.t <= t_cut ? out.train : out.holdout).samples.push_back(s);
    return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
    return is;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_field(const std::string& s, std::size_t line_no, const std::string& path) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || s.empty()) {
        throw ParseError(path + ":" + std::to_string(line_no) + ": invalid number '" + s + "'", line_no);
    }
    return v;
}

template <class Row>
void read_rows(const std::filesystem::path& path, const std::string& header, std::size_t columns,
               Row&& row) {
    std::ifstream is = open_in(path);
    std::string line;
    const std::string where = path.string();
    if (!std::getline(is, line)) throw ParseError(where + ":1: missing header", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) {
        throw ParseError(where + ":1: expected header '" + header + "'", 1);
    }
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_fields(line);
        if (fields.size() != columns) {
            throw ParseError(where + ":" + std::to_string(line_no) + ": expected " +
                                 std::to_string(columns) + " columns, found " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        row(fields, line_no, where);
    }
}

} // namespace

void save_csv(const SensorSeries& series, const std::filesystem::path& path) {
    std::ofstream os = open_out(path);
    os << "t_s,strain_microstrain\n";
    for (const auto& s : series.samples) os << format_double(s.t) << ',' << format_double(s.strain) << '\n';
}

void save_csv(const FiberScan& scan, const std::filesystem::path& path) {
    std::ofstream os = open_out(path);
    os << "x_m,y_m,strain_microstrain,damaged\n";
    for (const auto& p : scan.points) {
        os << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(p.strain) << ','
           << (p.damaged ? 1 : 0) << '\n';
    }
}

SensorSeries load_series_csv(const std::filesystem::path& path) {
    SensorSeries s;
    s.provenance = "file:" + path.string();
    read_rows(path, "t_s,strain_microstrain", 2,
              [&](const std::vector<std::string>& f, std::size_t line, const std::string& where) {
                  s.samples.push_back({parse_field(f[0], line, where), parse_field(f[1], line, where)});
              });
    // Infer the rate when the spacing is uniform.
    if (s.samples.size() >= 2) {
        const double dt = s.samples[1].t - s.samples[0].t;
        bool uniform = dt > 0.0;
        for (std::size_t i = 2; i < s.samples.size() && uniform; ++i) {
            uniform = std::abs((s.samples[i].t - s.samples[i - 1].t) / dt - 1.0) <= 1e-6;
        }
        if (uniform) s.rate = 1.0 / dt;
    }
    s.validate();
    return s;
}

FiberScan load_fiber_csv(const std::filesystem::path& path, FiberId fiber) {
    FiberScan scan;
    scan.fiber = fiber;
    read_rows(path, "x_m,y_m,strain_microstrain,damaged", 4,
              [&](const std::vector<std::string>& f, std::size_t line, const std::string& where) {
                  FiberPoint p{parse_field(f[0], line, where), parse_field(f[1], line, where),
                               parse_field(f[2], line, where), false};
                  if (f[3] == "1") {
                      p.damaged = true;
                  } else if (f[3] != "0") {
                      throw ParseError(where + ":" + std::to_string(line) + ": damaged must be 0 or 1",
                                       line);
                  }
                  scan.points.push_back(p);
              });
    for (std::size_t i = 1; i < scan.points.size(); ++i) {
        if (scan.points[i].y != scan.points[0].y) {
            throw ValidationError(path.string() + ": y is not constant along the fiber");
        }
    }
    return scan;
}

} // namespace pinn::datagen

#include "pinn/datagen.hpp"
#include "pinn/oracle.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

using namespace pinn;
using namespace pinn::datagen;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "pinn_test_datagen";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

} // namespace

TEST(SynthTemporal, NoiseFreeStartsAtMinus293) {
    const SensorSeries s = synth_temporal(9.87, -293.0, 16.0, 10.0, {0.0, 1});
    ASSERT_EQ(s.samples.size(), 161u);
    EXPECT_EQ(s.samples[0].t, 0.0);
    EXPECT_EQ(s.samples[0].strain, -293.0);
    EXPECT_NEAR(s.samples[10].strain, -293.0 * std::cos(std::sqrt(9.87)), 1e-12);
    EXPECT_NO_THROW(s.validate());
}

TEST(SynthTemporal, SameSeedSameSeries) {
    const auto a = synth_temporal(9.87, -293.0, 16.0, 10.0, {3.0, 7});
    const auto b = synth_temporal(9.87, -293.0, 16.0, 10.0, {3.0, 7});
    const auto c = synth_temporal(9.87, -293.0, 16.0, 10.0, {3.0, 8});
    EXPECT_EQ(a, b);
    EXPECT_FALSE(a == c);
}

TEST(SynthTemporal, RejectsBadArguments) {
    EXPECT_THROW(synth_temporal(9.87, 1.0, 0.0, 10.0, {}), std::invalid_argument);
    EXPECT_THROW(synth_temporal(9.87, 1.0, 1.0, 0.0, {}), std::invalid_argument);
    EXPECT_THROW(synth_temporal(9.87, 1.0, 1.0, 1.0, {-1.0, 0}), std::invalid_argument);
}

TEST(SynthTemporalProperty, NoiseHasZeroMean) {
    const double sigma = 3.0;
    const auto noisy = synth_temporal(9.87, -293.0, 2000.0, 10.0, {sigma, 42});
    const auto clean = synth_temporal(9.87, -293.0, 2000.0, 10.0, {0.0, 42});
    const std::size_t n = noisy.samples.size();
    ASSERT_GE(n, 10000u);
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = noisy.samples[i].strain - clean.samples[i].strain;
        sum += d;
        sq += d * d;
    }
    EXPECT_LT(std::abs(sum / n), 3.0 * sigma / std::sqrt(static_cast<double>(n)));
    EXPECT_NEAR(std::sqrt(sq / n), sigma, 0.1 * sigma);
}

TEST(SynthFiber, NoiseFreeWithoutCracksEqualsOracle) {
    const spatial::Geometry g;
    const spatial::Material m;
    const spatial::FourPointLayout l;
    const FiberLayout f = FiberLayout::for_geometry(g);
    const auto scans = synth_fiber_scans(g, m, l, f, {0.0, 0}, CrackModel{});
    ASSERT_EQ(scans.compression.points.size(), 200u);
    ASSERT_EQ(scans.tension.points.size(), 100u);
    for (const auto* s : {&scans.compression, &scans.tension}) {
        for (const auto& p : s->points) {
            EXPECT_EQ(p.strain, oracle::euler_bernoulli_strain(g, m, l, p.x, p.y));
            EXPECT_FALSE(p.damaged);
        }
    }
    EXPECT_EQ(scans.compression.points.front().x, -1.5);
    EXPECT_EQ(scans.compression.points.back().x, 1.5);
}

TEST(SynthFiber, CompressionFiberIsNegativeBetweenSupports) {
    const spatial::Geometry g;
    const spatial::FourPointLayout l;
    const auto scans = synth_fiber_scans(g, {}, l, FiberLayout::for_geometry(g), {0.0, 0}, CrackModel{});
    for (const auto& p : scans.compression.points) {
        if (std::abs(p.x) < l.support_x - 1e-9) {
            EXPECT_LT(p.strain, 0.0) << p.x;
        }
    }
}

TEST(SynthFiber, DamagedFlagsMatchCrackIntervals) {
    const spatial::Geometry g;
    const spatial::Material m;
    const spatial::FourPointLayout l;
    const CrackModel crack = CrackModel::default_model();
    const auto scans = synth_fiber_scans(g, m, l, FiberLayout::for_geometry(g), {0.0, 0}, crack);
    int damaged = 0;
    for (const auto& p : scans.tension.points) {
        const bool inside = std::any_of(crack.intervals.begin(), crack.intervals.end(),
                                        [&](const CrackInterval& c) { return p.x >= c.x_begin && p.x <= c.x_end; });
        EXPECT_EQ(p.damaged, inside) << p.x;
        const double ref = oracle::euler_bernoulli_strain(g, m, l, p.x, p.y);
        if (inside) {
            ++damaged;
            EXPECT_NEAR(std::abs(p.strain), 2.5 * std::abs(ref), 1e-12);
        }
    }
    EXPECT_GT(damaged, 0);
    for (const auto& p : scans.compression.points) EXPECT_FALSE(p.damaged);
}

TEST(SynthFiber, DeterministicPerSeed) {
    const spatial::Geometry g;
    const auto f = FiberLayout::for_geometry(g);
    const auto a = synth_fiber_scans(g, {}, {}, f, {2.0, 11}, CrackModel::default_model());
    const auto b = synth_fiber_scans(g, {}, {}, f, {2.0, 11}, CrackModel::default_model());
    EXPECT_EQ(a.compression, b.compression);
    EXPECT_EQ(a.tension, b.tension);
}

TEST(SynthFiber, FiberOutsideSectionIsRejected) {
    const spatial::Geometry g;
    FiberLayout f = FiberLayout::for_geometry(g);
    f.y_tension = -0.2;
    EXPECT_THROW(synth_fiber_scans(g, {}, {}, f, {}, CrackModel{}), std::invalid_argument);
}

TEST(CrackModel, OverlappingIntervalsAreRejected) {
    CrackModel c;
    c.intervals = {{0.0, 0.3, 2.0}, {0.2, 0.4, 2.0}};
    EXPECT_THROW(c.validate(spatial::Geometry{}), std::invalid_argument);
    c.intervals = {{1.4, 1.6, 2.0}};
    EXPECT_THROW(c.validate(spatial::Geometry{}), std::invalid_argument);
    c.intervals = {{0.0, 0.1, 0.9}};
    EXPECT_THROW(c.validate(spatial::Geometry{}), std::invalid_argument);
    EXPECT_NO_THROW(CrackModel::default_model().validate(spatial::Geometry{}));
}

TEST(Split, SixSecondCutGives61And100) {
    const auto s = synth_temporal(9.87, -293.0, 16.0, 10.0, {3.0, 7});
    const auto sp = split_train_window(s, 6.0);
    EXPECT_EQ(sp.train.samples.size(), 61u);
    EXPECT_EQ(sp.holdout.samples.size(), 100u);
    EXPECT_EQ(sp.train.samples.back().t, 6.0);
}

TEST(Split, CutAtLastSampleLeavesEmptyHoldout) {
    const auto s = synth_temporal(9.87, -293.0, 16.0, 10.0, {});
    const auto sp = split_train_window(s, 16.0);
    EXPECT_EQ(sp.train.samples.size(), 161u);
    EXPECT_TRUE(sp.holdout.samples.empty());
}

TEST(Split, CutOutsideSpanIsUsageError) {
    const auto s = synth_temporal(9.87, -293.0, 16.0, 10.0, {});
    EXPECT_THROW(split_train_window(s, -0.1), std::invalid_argument);
    EXPECT_THROW(split_train_window(s, 16.5), std::invalid_argument);
}

TEST(SplitProperty, ConcatenationReproducesOriginal) {
    const auto s = synth_temporal(9.87, -293.0, 16.0, 10.0, {3.0, 1});
    for (double cut : {0.0, 0.05, 3.3, 6.0, 15.95, 16.0}) {
        const auto sp = split_train_window(s, cut);
        auto joined = sp.train.samples;
        joined.insert(joined.end(), sp.holdout.samples.begin(), sp.holdout.samples.end());
        EXPECT_EQ(joined, s.samples) << cut;
    }
}

TEST(Csv, SeriesRoundTripIsExact) {
    const auto s = synth_temporal(9.87, -293.0, 16.0, 10.0, {3.0, 5});
    const fs::path p = temp_file("series.csv");
    save_csv(s, p);
    const auto back = load_series_csv(p);
    EXPECT_EQ(back, s);
    EXPECT_NEAR(back.rate, 10.0, 1e-9);
    EXPECT_EQ(back.provenance, "file:" + p.string());
}

TEST(Csv, FiberRoundTripIsExact) {
    const spatial::Geometry g;
    const auto scans = synth_fiber_scans(g, {}, {}, FiberLayout::for_geometry(g), {2.0, 3},
                                         CrackModel::default_model());
    const fs::path p = temp_file("fiber2.csv");
    save_csv(scans.tension, p);
    EXPECT_EQ(load_fiber_csv(p, FiberId::tension), scans.tension);
}

TEST(Csv, HeaderOnlyIsEmptyAndValid) {
    const fs::path a = temp_file("empty_series.csv"), b = temp_file("empty_fiber.csv");
    write_text(a, "t_s,strain_microstrain\n");
    write_text(b, "x_m,y_m,strain_microstrain,damaged\n");
    EXPECT_TRUE(load_series_csv(a).samples.empty());
    EXPECT_TRUE(load_fiber_csv(b, FiberId::compression).points.empty());
}

TEST(Csv, ShortRowNamesTheLine) {
    const fs::path p = temp_file("short.csv");
    write_text(p, "x_m,y_m,strain_microstrain,damaged\n0,0.12,-3,0\n0.1,0.12\n");
    try {
        load_fiber_csv(p, FiberId::compression);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos);
    }
}

TEST(Csv, BadNumberAndHeaderAreParseErrors) {
    const fs::path p = temp_file("bad.csv");
    write_text(p, "t_s,strain_microstrain\n0,1\n0.1,abc\n");
    EXPECT_THROW(load_series_csv(p), ParseError);
    write_text(p, "time,strain\n0,1\n");
    EXPECT_THROW(load_series_csv(p), ParseError);
}

TEST(Csv, NonMonotoneTimeIsValidationError) {
    const fs::path p = temp_file("nonmono.csv");
    write_text(p, "t_s,strain_microstrain\n0,1\n0.2,2\n0.1,3\n");
    EXPECT_THROW(load_series_csv(p), ValidationError);
}

TEST(Format, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(-293.0), "-293");
    const double v = 1.0 / 3.0;
    EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(Fnv1a, KnownVector) {
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
}

#include "pinn/oracle.hpp"
#include "pinn/spatial.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>

using namespace pinn;
using namespace pinn::spatial;
using autodiff::Jet;
using autodiff::Tape;

namespace {

BeamSetup small_setup() {
    BeamSetup s;
    s.counts.interior = 200;
    s.counts.per_edge = 20;
    return s;
}

datagen::FiberScans small_scans(const BeamSetup& s, double sigma = 2.0) {
    datagen::FiberLayout f = datagen::FiberLayout::for_geometry(s.geometry);
    f.n_compression = 20;
    f.n_tension = 40;
    return datagen::synth_fiber_scans(s.geometry, s.material, s.layout, f, {sigma, 11},
                                      datagen::CrackModel::default_model());
}

SpatialProblem small_problem(int scenario) {
    const BeamSetup s = small_setup();
    const auto scans = small_scans(s);
    return make_beam_problem(s, scans.compression, scans.tension, scenario);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace

TEST(Scaling, HatUnitsFromGeometryAndMaterial) {
    const Scaling s = Scaling::from(Geometry{}, Material{});
    EXPECT_DOUBLE_EQ(s.half_length, 1.5);
    EXPECT_DOUBLE_EQ(s.half_height, 0.15);
    EXPECT_DOUBLE_EQ(s.stress, 2.9e6);
    EXPECT_DOUBLE_EQ(s.displacement, 1.5e-4);
    EXPECT_DOUBLE_EQ(s.aspect, 10.0);
    // Plane stress, nu = 0.2: mu/E = 1/2.4, lambda*/E = nu/(1 - nu^2).
    EXPECT_NEAR(s.mu_hat, 1.0 / 2.4, 1e-15);
    EXPECT_NEAR(s.lambda_hat, 0.2 / 0.96, 1e-15);
    EXPECT_DOUBLE_EQ(s.xh(1.5), 1.0);
    EXPECT_DOUBLE_EQ(s.yh(-0.15), -1.0);
}

TEST(Material, PlaneStrainLambda) {
    Material m;
    m.assumption = PlaneAssumption::plane_strain;
    const double e = m.youngs_modulus, nu = m.poisson_ratio;
    EXPECT_NEAR(m.lambda(), e * nu / ((1 + nu) * (1 - 2 * nu)), 1e-6);
    EXPECT_NEAR(m.mu(), e / (2 * (1 + nu)), 1e-6);
    m.poisson_ratio = 0.5;
    EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(FourPoint, TractionsAreBalanced) {
    const Geometry g;
    const auto bcs = four_point_tractions(g, FourPointLayout{});
    EXPECT_EQ(bcs.size(), 4u);
    EXPECT_NEAR(net_vertical_force(g, bcs), 0.0, 1e-9);
}

TEST(Scenario, BuildersSetWeightsAndData) {
    const BeamSetup s = small_setup();
    const auto scans = small_scans(s);
    const auto p1 = make_beam_problem(s, scans.compression, scans.tension, 1);
    const auto p2 = make_beam_problem(s, scans.compression, scans.tension, 2);
    const auto p3 = make_beam_problem(s, scans.compression, scans.tension, 3);
    EXPECT_TRUE(p1.tension.points.empty());
    EXPECT_EQ(p1.weights.exp_t, 0.0);
    EXPECT_EQ(p2.weights.exp_t, 1.0);
    EXPECT_EQ(p3.weights.exp_t, 0.01);
    for (const auto* p : {&p1, &p2, &p3}) {
        EXPECT_EQ(p->weights.pde, 1.0);
        EXPECT_EQ(p->weights.bc, 1.0);
        EXPECT_EQ(p->weights.exp_c, 1.0);
        EXPECT_EQ(p->compression.points.size(), 20u);
    }
    EXPECT_EQ(p2.tension, undamaged(scans.tension));
    EXPECT_LT(p2.tension.points.size(), scans.tension.points.size());
    for (const auto& pt : p2.tension.points) EXPECT_FALSE(pt.damaged);
    EXPECT_THROW(make_beam_problem(s, scans.compression, scans.tension, 4), autodiff::UsageError);
    EXPECT_EQ(make_beam_problem(s, scans.compression, scans.tension, 2, false).weights.rot, 0.0);
}

TEST(Scenario, ValidateEnforcesScenarioInvariants) {
    SpatialProblem p = small_problem(3);
    p.weights.exp_t = 0.02;
    EXPECT_THROW(p.validate(), autodiff::UsageError);
    SpatialProblem q = small_problem(2);
    q.scenario = 1;
    EXPECT_THROW(q.validate(), autodiff::UsageError);
    SpatialProblem r = small_problem(1);
    r.interior.resize(2, 0);
    r.body_force.resize(2, 0);
    EXPECT_THROW(r.validate(), autodiff::UsageError);
}

TEST(Collocation, InteriorPointsAreMirroredAndInside) {
    const Eigen::Matrix2Xd p = interior_points({1000, 10, 5});
    ASSERT_EQ(p.cols(), 1000);
    for (Eigen::Index i = 0; i < p.cols(); i += 2) {
        EXPECT_EQ(p(0, i + 1), -p(0, i));
        EXPECT_EQ(p(1, i + 1), p(1, i));
        EXPECT_LE(std::abs(p(0, i)), 1.0);
        EXPECT_LE(std::abs(p(1, i)), 1.0);
    }
    EXPECT_EQ(interior_points({1000, 10, 5}), p);
}

TEST(Residual, UniaxialPlaneStressFieldSatisfiesHooke) {
    const Scaling s = Scaling::from(Geometry{}, Material{});
    const double c = 0.7, nu = 0.2;
    Tape t;
    const Jet xh = autodiff::seed(t, 0.3, 2, 0, 1), yh = autodiff::seed(t, -0.4, 2, 1, 1);
    const Jet zero = xh * 0.0;
    FieldJets f{xh * c, yh * (-nu * c / s.aspect), zero + c, zero, zero};
    for (const auto& r : residual_constitutive(f, s)) EXPECT_NEAR(r.value(), 0.0, 1e-15);
    for (const auto& r : residual_balance(f, s.aspect)) EXPECT_EQ(r.value(), 0.0);
    EXPECT_EQ(strain_xx_hat(f).value(), c);
    EXPECT_EQ(rotation(f, s.aspect).value(), 0.0);
}

TEST(Residual, RigidRotationHasNoStrain) {
    const Scaling s = Scaling::from(Geometry{}, Material{});
    Tape t;
    const Jet xh = autodiff::seed(t, 0.1, 2, 0, 1), yh = autodiff::seed(t, 0.9, 2, 1, 1);
    const Jet zero = xh * 0.0;
    // ux = -theta y, uy = theta x in physical units; hat units carry the aspect ratio.
    const double theta = 0.3;
    FieldJets f{yh * (-theta / s.aspect), xh * theta, zero, zero, zero};
    for (const auto& r : residual_constitutive(f, s)) EXPECT_NEAR(r.value(), 0.0, 1e-15);
    EXPECT_NEAR(rotation(f, s.aspect).value(), theta, 1e-15);
}

TEST(Manufactured, ExactFieldHasNegligibleLoss) {
    const Geometry g;
    const Material m;
    const auto ms = oracle::manufactured_solution(g, m);
    const SpatialProblem p = make_manufactured_problem(g, m, ms, {});
    const SpatialLoss l = loss_analytic(p, [&](const Jet& x, const Jet& y) { return ms.fields(x, y); });
    EXPECT_LT(l.total, 1e-12);
    EXPECT_LT(l.pde, 1e-12);
    EXPECT_LT(l.bc, 1e-12);
    EXPECT_EQ(l.exp_c, 0.0);
    EXPECT_EQ(l.exp_t, 0.0);
}

TEST(Manufactured, TractionWeightIsAspectSquared) {
    const Geometry g;
    const Material m;
    const SpatialProblem p = make_manufactured_problem(g, m, oracle::manufactured_solution(g, m), {});
    EXPECT_DOUBLE_EQ(p.weights.bc, 100.0);
    EXPECT_EQ(p.weights.pde, 1.0);
}

TEST(Manufactured, PerturbedFieldHasPositiveLoss) {
    const Geometry g;
    const Material m;
    auto ms = oracle::manufactured_solution(g, m);
    const SpatialProblem p = make_manufactured_problem(g, m, ms, {});
    auto wrong = ms;
    wrong.amp_x *= 1.1;
    const SpatialLoss l = loss_analytic(p, [&](const Jet& x, const Jet& y) { return wrong.fields(x, y); });
    EXPECT_GT(l.pde, 1e-6);
}

TEST(HardConstraintProperty, ZeroOnConstrainedLociForRandomParameters) {
    const Geometry g;
    const Material m;
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> uy(-0.15, 0.15);
    for (int draw = 0; draw < 1000; ++draw) {
        const SpatialModel model = make_spatial_model(g, m, 1000 + draw, true, {8, 8});
        const double y = uy(rng);
        Tape t;
        EXPECT_EQ(fields(model, t, 0.0, y, 0)[kUx].value.value(), 0.0);
        for (double x : {-1.5, 1.5}) {
            const FieldJets f = fields(model, t, x, y, 0);
            EXPECT_EQ(f[kSxx].value.value(), 0.0);
            EXPECT_EQ(f[kSxy].value.value(), 0.0);
        }
        EXPECT_EQ(fields(model, t, 0.0, -0.15, 0)[kUy].value.value(), 0.0);
    }
}

TEST(HardConstraint, BatchedPredictionIsExactlyZeroOnLoci) {
    const SpatialModel model = make_spatial_model(Geometry{}, Material{}, 4);
    Eigen::Matrix2Xd pts(2, 5);
    pts << 0.0, -1.5, 1.5, 0.0, 1.5, 0.07, 0.1, -0.12, -0.15, 0.15;
    const auto f = predict_field(model, pts);
    EXPECT_EQ(f[0].ux, 0.0);
    EXPECT_EQ(f[1].sxx, 0.0);
    EXPECT_EQ(f[1].sxy, 0.0);
    EXPECT_EQ(f[2].sxx, 0.0);
    EXPECT_EQ(f[2].sxy, 0.0);
    // Anchor and point are evaluated in different batch columns.
    EXPECT_LE(std::abs(f[3].uy), 1e-15);
    EXPECT_EQ(f[3].ux, 0.0);
    EXPECT_EQ(f[4].sxy, 0.0);
}

TEST(HardConstraint, UnpinnedModelLeavesUyFree) {
    const SpatialModel model = make_spatial_model(Geometry{}, Material{}, 4, false);
    Eigen::Matrix2Xd pts(2, 1);
    pts << 0.0, -0.15;
    EXPECT_NE(predict_field(model, pts)[0].uy, 0.0);
}

TEST(LossProperty, TotalIsWeightedSumForAllScenarios) {
    for (int scenario = 1; scenario <= 3; ++scenario) {
        const SpatialProblem p = small_problem(scenario);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const SpatialModel model = make_spatial_model(p.geometry, p.material, seed, true, {12, 12});
            const SpatialLoss l = loss_spatial(p, model);
            const auto& w = p.weights;
            const double sum = w.pde * l.pde + w.bc * l.bc + w.exp_c * l.exp_c + w.exp_t * l.exp_t + w.rot * l.rot;
            EXPECT_LE(rel(l.total, sum), 1e-14) << scenario;
            if (scenario == 1) EXPECT_EQ(l.exp_t, 0.0);
            else EXPECT_GT(l.exp_t, 0.0);
        }
    }
}

TEST(Loss, BatchedAndTapePathsAgree) {
    const SpatialProblem p = small_problem(2);
    for (bool pin : {true, false}) {
        const SpatialModel model = make_spatial_model(p.geometry, p.material, 3, pin, {10, 10});
        SpatialLossEvaluator a(p, model, ForwardPath::batched), b(p, model, ForwardPath::tape);
        std::vector<double> ga, gb;
        const SpatialLoss la = a.evaluate(model.params, &ga);
        const SpatialLoss lb = b.evaluate(model.params, &gb);
        EXPECT_LE(rel(la.total, lb.total), 1e-12);
        EXPECT_LE(rel(la.pde, lb.pde), 1e-12);
        EXPECT_LE(rel(la.bc, lb.bc), 1e-12);
        EXPECT_LE(rel(la.exp_c, lb.exp_c), 1e-12);
        EXPECT_LE(rel(la.exp_t, lb.exp_t), 1e-12);
        EXPECT_NEAR(la.rot, lb.rot, 1e-12 * (la.rot + 1e-12));
        ASSERT_EQ(ga.size(), gb.size());
        double scale = 0.0;
        for (double v : gb) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < ga.size(); ++i) EXPECT_NEAR(ga[i], gb[i], 1e-10 * scale);
    }
}

TEST(Loss, GradientMatchesFiniteDifferences) {
    const SpatialProblem p = small_problem(3);
    const SpatialModel model = make_spatial_model(p.geometry, p.material, 6, true, {5, 5});
    SpatialLossEvaluator ev(p, model);
    std::vector<double> g;
    ev.evaluate(model.params, &g);
    network::ParamStore q = model.params;
    const double h = 1e-6;
    for (std::size_t i = 0; i < q.flat.size(); i += 3) {
        const double x0 = q.flat[i];
        q.flat[i] = x0 + h;
        const double fp = ev.evaluate(q, nullptr).total;
        q.flat[i] = x0 - h;
        const double fm = ev.evaluate(q, nullptr).total;
        q.flat[i] = x0;
        const double fd = (fp - fm) / (2 * h);
        EXPECT_NEAR(g[i], fd, 1e-5 * std::max(1.0, std::abs(fd))) << i;
    }
}

TEST(Scenario, TwoWithZeroTensionWeightEqualsOne) {
    const SpatialProblem p1 = small_problem(1);
    SpatialProblem p2 = small_problem(2);
    p2.weights.exp_t = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const SpatialModel model = make_spatial_model(p1.geometry, p1.material, seed, true, {10, 10});
        EXPECT_LE(rel(loss_spatial(p2, model).total, loss_spatial(p1, model).total), 1e-15);
    }
}

TEST(ScenarioProperty, LossIsMonotoneInTensionWeight) {
    SpatialProblem p = small_problem(2);
    const SpatialModel model = make_spatial_model(p.geometry, p.material, 2, true, {10, 10});
    double prev = -1.0;
    for (double w : {0.0, 0.01, 0.1, 1.0, 10.0}) {
        p.weights.exp_t = w;
        const double l = loss_spatial(p, model).total;
        EXPECT_GE(l, prev);
        prev = l;
    }
}

TEST(Fields, StrainMatchesDisplacementDerivative) {
    const SpatialModel model = make_spatial_model(Geometry{}, Material{}, 7, true, {10, 10});
    const double x = 0.4, y = -0.05, h = 1e-6;
    Eigen::Matrix2Xd pts(2, 3);
    pts << x - h, x, x + h, y, y, y;
    const auto f = predict_field(model, pts);
    const double fd = (f[2].ux - f[0].ux) / (2 * h) * 1e6;
    EXPECT_NEAR(f[1].exx, fd, 1e-5 * std::max(1.0, std::abs(fd)));
    Tape t;
    EXPECT_NEAR(strain_xx(model, t, x, y).value(), f[1].exx, 1e-10 * std::max(1.0, std::abs(fd)));
}

TEST(Fields, PhysicalUnitsFollowScaling) {
    const SpatialModel model = make_spatial_model(Geometry{}, Material{}, 7, true, {10, 10});
    Eigen::Matrix2Xd pts(2, 1);
    pts << 0.3, 0.02;
    const auto f = predict_field(model, pts)[0];
    Tape t;
    const FieldJets j = fields(model, t, 0.3, 0.02, 0);
    EXPECT_NEAR(f.ux, j[kUx].value.value() * 1.5e-4, 1e-18);
    EXPECT_NEAR(f.sxx, j[kSxx].value.value() * 2.9e6, 1e-6);
    EXPECT_NEAR(f.syy, j[kSyy].value.value() * 2.9e6, 1e-6);
}

TEST(Grid, CellCentredOrdering) {
    const Eigen::Matrix2Xd p = field_grid(Geometry{}, 100, 20);
    ASSERT_EQ(p.cols(), 2000);
    EXPECT_DOUBLE_EQ(p(0, 0), -1.5 + 0.015);
    EXPECT_DOUBLE_EQ(p(1, 0), -0.15 + 0.0075);
    EXPECT_DOUBLE_EQ(p(0, 99), 1.5 - 0.015);
    EXPECT_DOUBLE_EQ(p(1, 100), -0.15 + 3 * 0.0075);
    EXPECT_THROW(field_grid(Geometry{}, 0, 3), autodiff::UsageError);
}

TEST(Smoothness, MeanSquaredSecondDifference) {
    EXPECT_EQ(smoothness({1.0, 2.0, 3.0, 4.0}), 0.0);
    EXPECT_EQ(smoothness({0.0, 1.0, 0.0}), 4.0);
    EXPECT_EQ(smoothness({0.0, 1.0, 0.0, 1.0}), 4.0);
    EXPECT_EQ(smoothness({5.0}), 0.0);
}

TEST(Predict, TenThousandPointsWithinLatencyBudget) {
    const SpatialModel model = make_spatial_model(Geometry{}, Material{}, 1);
    const Eigen::Matrix2Xd pts = field_grid(Geometry{}, 200, 50);
    const auto t0 = std::chrono::steady_clock::now();
    const auto f = predict_field(model, pts);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_EQ(f.size(), 10000u);
    EXPECT_LT(dt, 1.0);
}

TEST(Train, ShortRunReducesLoss) {
    const SpatialProblem p = small_problem(2);
    const SpatialModel m0 = make_spatial_model(p.geometry, p.material, 0, true, {16, 16});
    optim::OptimConfig c = default_optim();
    c.adam_epochs = 100;
    c.lbfgs_max_iters = 100;
    const SpatialTrainResult r = train_spatial(p, m0, c);
    EXPECT_LT(r.history.records.back().loss, r.history.records.front().loss);
    EXPECT_EQ(r.history.component_names, spatial_component_names());
}

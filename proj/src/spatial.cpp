#include "pinn/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>

namespace pinn::spatial {

using autodiff::Jet;
using autodiff::Tape;
using autodiff::UsageError;
using autodiff::Var;
using Eigen::Index;

Scaling Scaling::from(const Geometry& g, const Material& m) {
    g.validate();
    m.validate();
    Scaling s;
    s.half_length = 0.5 * g.length;
    s.half_height = 0.5 * g.height;
    s.stress = 1e-4 * m.youngs_modulus;
    s.displacement = 1e-4 * s.half_length;
    s.aspect = g.length / g.height;
    s.lambda_hat = m.lambda() / m.youngs_modulus;
    s.mu_hat = m.mu() / m.youngs_modulus;
    return s;
}

int validate_scenario(int scenario) {
    if (scenario < 1 || scenario > 3) throw UsageError("scenario must be 1, 2 or 3");
    return scenario;
}

void SpatialProblem::validate() const {
    geometry.validate();
    material.validate();
    validate_scenario(scenario);
    if (interior.cols() == 0) throw UsageError("spatial problem: empty interior collocation set");
    if (body_force.cols() != interior.cols()) {
        throw UsageError("spatial problem: body force needs one column per interior point");
    }
    if (top_traction.cols() != top.cols() || bottom_traction.cols() != bottom.cols()) {
        throw UsageError("spatial problem: traction targets do not match edge points");
    }
    const auto& w = weights;
    if (!(w.pde >= 0 && w.bc >= 0 && w.exp_c >= 0 && w.exp_t >= 0 && w.rot >= 0)) {
        throw UsageError("spatial problem: weights must be >= 0");
    }
    if (scenario == 1 && !tension.points.empty()) {
        throw UsageError("spatial problem: scenario 1 uses no tension data");
    }
    if (scenario == 3 && w.exp_t != 0.01) {
        throw UsageError("spatial problem: scenario 3 fixes the tension weight to 0.01");
    }
    compression.validate(geometry);
    tension.validate(geometry);
}

Eigen::Matrix2Xd interior_points(const CollocationCounts& counts) {
    if (counts.interior < 2 || counts.interior % 2 != 0) {
        throw UsageError("interior collocation count must be even and >= 2");
    }
    std::mt19937_64 rng(counts.seed);
    std::uniform_real_distribution<double> half(0.0, 1.0);
    std::uniform_real_distribution<double> full(-1.0, 1.0);
    Eigen::Matrix2Xd p(2, counts.interior);
    for (int i = 0; i < counts.interior / 2; ++i) {
        const double xh = half(rng);
        const double yh = full(rng);
        p.col(2 * i) << xh, yh;
        p.col(2 * i + 1) << -xh, yh;
    }
    return p;
}

Eigen::Matrix2Xd edge_points(int n, double yh) {
    if (n < 1) throw UsageError("edge point count must be >= 1");
    Eigen::Matrix2Xd p(2, n);
    for (int i = 0; i < n; ++i) p.col(i) << -1.0 + (2.0 * i + 1.0) / n, yh;
    return p;
}

std::array<double, 2> traction_at(const std::vector<TractionBC>& bcs, Edge edge, double x,
                                  double stress_scale) {
    std::array<double, 2> t{0.0, 0.0};
    for (const auto& bc : bcs) {
        if (bc.edge == edge && x >= bc.x_begin && x <= bc.x_end) {
            t[0] += bc.tx / stress_scale;
            t[1] += bc.ty / stress_scale;
        }
    }
    return t;
}

datagen::FiberScan undamaged(const datagen::FiberScan& scan) {
    datagen::FiberScan out;
    out.fiber = scan.fiber;
    std::copy_if(scan.points.begin(), scan.points.end(), std::back_inserter(out.points),
                 [](const datagen::FiberPoint& p) { return !p.damaged; });
    return out;
}

namespace {

void fill_edges(SpatialProblem& p, int per_edge, const std::function<std::array<double, 2>(Edge, double)>& target) {
    p.top = edge_points(per_edge, 1.0);
    p.bottom = edge_points(per_edge, -1.0);
    p.top_traction.resize(2, per_edge);
    p.bottom_traction.resize(2, per_edge);
    for (int i = 0; i < per_edge; ++i) {
        const auto t = target(Edge::top, p.top(0, i));
        p.top_traction.col(i) << t[0], t[1];
        const auto b = target(Edge::bottom, p.bottom(0, i));
        p.bottom_traction.col(i) << b[0], b[1];
    }
}

} // namespace

SpatialProblem make_beam_problem(const BeamSetup& setup, const datagen::FiberScan& compression,
                                 const datagen::FiberScan& tension_all, int scenario,
                                 bool rotation_penalty) {
    validate_scenario(scenario);
    SpatialProblem p;
    p.geometry = setup.geometry;
    p.material = setup.material;
    p.scenario = scenario;
    p.bcs = four_point_tractions(setup.geometry, setup.layout);
    const Scaling s = p.scaling();

    p.interior = interior_points(setup.counts);
    p.body_force.resize(2, p.interior.cols());
    p.body_force.row(0).setConstant(setup.body_force[0] * s.half_length / s.stress);
    p.body_force.row(1).setConstant(setup.body_force[1] * s.half_length / s.stress);
    fill_edges(p, setup.counts.per_edge, [&](Edge e, double xh) {
        return traction_at(p.bcs, e, xh * s.half_length, s.stress);
    });

    p.compression = compression;
    p.weights.rot = rotation_penalty ? 1e-2 : 0.0;
    switch (scenario) {
    case 1:
        p.tension = {datagen::FiberId::tension, {}};
        p.weights.exp_t = 0.0;
        break;
    case 2:
        p.tension = undamaged(tension_all);
        break;
    case 3:
        p.tension = undamaged(tension_all);
        p.weights.exp_t = 0.01;
        break;
    }
    p.validate();
    return p;
}

SpatialProblem make_manufactured_problem(const Geometry& g, const Material& m,
                                         const oracle::ManufacturedSolution& ms,
                                         const CollocationCounts& counts, bool rotation_penalty) {
    SpatialProblem p;
    p.geometry = g;
    p.material = m;
    p.scenario = 1;
    p.interior = interior_points(counts);
    p.body_force.resize(2, p.interior.cols());
    for (Index i = 0; i < p.interior.cols(); ++i) {
        const auto b = ms.body_force(p.interior(0, i), p.interior(1, i));
        p.body_force.col(i) << b[0], b[1];
    }
    fill_edges(p, counts.per_edge, [&](Edge e, double xh) { return ms.traction(e, xh); });
    p.compression = {datagen::FiberId::compression, {}};
    p.tension = {datagen::FiberId::tension, {}};
    p.weights.exp_c = 0.0;
    p.weights.exp_t = 0.0;
    // Smooth bending modes cost only ~(M''/r^2)^2 through the tractions.
    p.weights.bc = g.aspect() * g.aspect();
    p.weights.rot = rotation_penalty ? 1e-2 : 0.0;
    p.validate();
    return p;
}

// ---------------------------------------------------------------------------
// Model

network::OutputTransform hard_constraint_transform(bool pin_uy) {
    using network::CoordinateFn;
    const CoordinateFn xh = [](std::span<const Jet> x) { return x[0]; };
    const CoordinateFn bubble = [](std::span<const Jet> x) {
        return (-x[0] + 1.0) * (x[0] + 1.0);
    };
    network::OutputTransform t;
    t.rules.resize(kFieldCount);
    t.rules[kUx].multiplier = xh;
    t.rules[kUy].anchored = pin_uy;
    t.rules[kSxx].multiplier = bubble;
    t.rules[kSxy].multiplier = bubble;
    if (pin_uy) t.anchor = {0.0, -1.0};
    return t;
}

SpatialModel make_spatial_model(const Geometry& g, const Material& m, std::uint64_t seed,
                                bool pin_uy, std::vector<int> hidden) {
    SpatialModel model;
    model.spec.input_dim = 2;
    model.spec.output_dim = kFieldCount;
    model.spec.hidden_layers = std::move(hidden);
    model.spec.seed = seed;
    model.params = network::init_glorot(model.spec);
    model.transform = hard_constraint_transform(pin_uy);
    model.scaling = Scaling::from(g, m);
    model.pin_uy = pin_uy;
    return model;
}

namespace {

FieldJets to_fields(const std::vector<Jet>& v) {
    return {v[0], v[1], v[2], v[3], v[4]};
}

std::vector<Var> anchor_outputs(const SpatialModel& model, Tape& tape,
                                const network::BoundParams& bound) {
    if (!model.transform.has_anchor()) return {};
    const std::array<Jet, 2> a{autodiff::seed(tape, model.transform.anchor[0], 2, 0, 0),
                               autodiff::seed(tape, model.transform.anchor[1], 2, 1, 0)};
    const auto raw = network::forward(model.spec, model.params, bound, a);
    std::vector<Var> out;
    for (const auto& j : raw) out.push_back(j.value);
    return out;
}

FieldJets tape_fields(const SpatialModel& model, const network::BoundParams& bound,
                      std::span<const Var> anchor, const Jet& xh, const Jet& yh) {
    const std::array<Jet, 2> x{xh, yh};
    const auto raw = network::forward(model.spec, model.params, bound, x);
    return to_fields(network::apply_transform(model.transform, x, raw, anchor));
}

} // namespace

FieldJets fields(const SpatialModel& model, Tape& tape, double x, double y, int order) {
    const network::BoundParams bound = network::bind_params(tape, model.params);
    const auto anchor = anchor_outputs(model, tape, bound);
    const Jet xh = autodiff::seed(tape, model.scaling.xh(x), 2, 0, order);
    const Jet yh = autodiff::seed(tape, model.scaling.yh(y), 2, 1, order);
    return tape_fields(model, bound, anchor, xh, yh);
}

// ---------------------------------------------------------------------------
// Residuals

std::array<Var, 2> residual_balance(const FieldJets& f, double aspect,
                                    std::array<double, 2> body_force) {
    if (f[0].order < 1) throw UsageError("residual_balance: need jets of order >= 1");
    const Var rx = f[kSxx].d1[0] + f[kSxy].d1[1] * aspect + body_force[0];
    const Var ry = f[kSxy].d1[0] + f[kSyy].d1[1] * aspect + body_force[1];
    return {rx, ry};
}

std::array<Var, 2> residual_balance(const SpatialModel& model, Tape& tape, double x, double y) {
    return residual_balance(fields(model, tape, x, y, 1), model.scaling.aspect);
}

std::array<Var, 3> residual_constitutive(const FieldJets& f, const Scaling& s) {
    if (f[0].order < 1) throw UsageError("residual_constitutive: need jets of order >= 1");
    const Var exx = f[kUx].d1[0];
    const Var eyy = f[kUy].d1[1] * s.aspect;
    const Var gxy = f[kUx].d1[1] * s.aspect + f[kUy].d1[0]; // 2 eps_xy
    const Var tr = (exx + eyy) * s.lambda_hat;
    const double two_mu = 2.0 * s.mu_hat;
    return {f[kSxx].value - (tr + exx * two_mu), f[kSyy].value - (tr + eyy * two_mu),
            f[kSxy].value - gxy * s.mu_hat};
}

std::array<Var, 3> residual_constitutive(const SpatialModel& model, Tape& tape, double x, double y) {
    return residual_constitutive(fields(model, tape, x, y, 1), model.scaling);
}

Var strain_xx_hat(const FieldJets& f) {
    if (f[kUx].order < 1) throw UsageError("strain_xx: need jets of order >= 1");
    return f[kUx].d1[0];
}

Var strain_xx(const SpatialModel& model, Tape& tape, double x, double y) {
    return strain_xx_hat(fields(model, tape, x, y, 1)) * kStrainUnitMicro;
}

Var rotation(const FieldJets& f, double aspect) {
    return (f[kUy].d1[0] - f[kUx].d1[1] * aspect) * 0.5;
}

// ---------------------------------------------------------------------------
// Loss

Var assemble_loss(const SpatialProblem& problem, Tape& tape, const FieldSource& source,
                  SpatialLoss& parts) {
    const Scaling s = problem.scaling();
    const auto seeds = [&](const Eigen::Matrix2Xd& pts, Index i, int order) {
        return std::array<Jet, 2>{autodiff::seed(tape, pts(0, i), 2, 0, order),
                                  autodiff::seed(tape, pts(1, i), 2, 1, order)};
    };

    const Index ni = problem.interior.cols();
    if (ni == 0) throw UsageError("loss_spatial: empty interior collocation set");
    std::array<Var, 5> pde_sum;
    for (auto& v : pde_sum) v = tape.constant(0.0);
    Var rot_sum = tape.constant(0.0);
    for (Index i = 0; i < ni; ++i) {
        const auto x = seeds(problem.interior, i, 1);
        const FieldJets f = source(Group::interior, i, x[0], x[1]);
        const auto rb = residual_balance(f, s.aspect, {problem.body_force(0, i), problem.body_force(1, i)});
        const auto rc = residual_constitutive(f, s);
        pde_sum[0] = pde_sum[0] + autodiff::square(rb[0]);
        pde_sum[1] = pde_sum[1] + autodiff::square(rb[1]);
        pde_sum[2] = pde_sum[2] + autodiff::square(rc[0]);
        pde_sum[3] = pde_sum[3] + autodiff::square(rc[1]);
        pde_sum[4] = pde_sum[4] + autodiff::square(rc[2]);
        rot_sum = rot_sum + rotation(f, s.aspect);
    }
    const double inv_i = 1.0 / static_cast<double>(ni);
    Var l_pde = pde_sum[0] * inv_i;
    for (int k = 1; k < 5; ++k) l_pde = l_pde + pde_sum[k] * inv_i;
    Var l_rot = autodiff::square(rot_sum * inv_i);

    Var bc_x = tape.constant(0.0), bc_y = tape.constant(0.0);
    const Index nt = problem.top.cols(), nb = problem.bottom.cols();
    for (Index i = 0; i < nt; ++i) {
        const auto x = seeds(problem.top, i, 0);
        const FieldJets f = source(Group::top, i, x[0], x[1]);
        bc_x = bc_x + autodiff::square(f[kSxy].value - problem.top_traction(0, i));
        bc_y = bc_y + autodiff::square(f[kSyy].value - problem.top_traction(1, i));
    }
    for (Index i = 0; i < nb; ++i) {
        const auto x = seeds(problem.bottom, i, 0);
        const FieldJets f = source(Group::bottom, i, x[0], x[1]);
        bc_x = bc_x + autodiff::square(-f[kSxy].value - problem.bottom_traction(0, i));
        bc_y = bc_y + autodiff::square(-f[kSyy].value - problem.bottom_traction(1, i));
    }
    Var l_bc = tape.constant(0.0);
    if (nt + nb > 0) {
        const double inv_b = 1.0 / static_cast<double>(nt + nb);
        l_bc = bc_x * inv_b + bc_y * inv_b;
    }

    const auto fiber_loss = [&](const datagen::FiberScan& scan, Group g) {
        Var sum = tape.constant(0.0);
        if (scan.points.empty()) return sum;
        for (std::size_t i = 0; i < scan.points.size(); ++i) {
            const auto& p = scan.points[i];
            const Jet xh = autodiff::seed(tape, s.xh(p.x), 2, 0, 1);
            const Jet yh = autodiff::seed(tape, s.yh(p.y), 2, 1, 1);
            const FieldJets f = source(g, static_cast<Index>(i), xh, yh);
            sum = sum + autodiff::square(strain_xx_hat(f) - p.strain / kStrainUnitMicro);
        }
        return sum * (1.0 / static_cast<double>(scan.points.size()));
    };
    Var l_c = fiber_loss(problem.compression, Group::fiber_compression);
    Var l_t = fiber_loss(problem.tension, Group::fiber_tension);

    const SpatialWeights& w = problem.weights;
    Var total = l_pde * w.pde + l_bc * w.bc + l_c * w.exp_c + l_t * w.exp_t + l_rot * w.rot;
    parts = {total.value(), l_pde.value(), l_bc.value(), l_c.value(), l_t.value(), l_rot.value()};
    return total;
}

SpatialLoss loss_analytic(const SpatialProblem& problem, const AnalyticField& field) {
    problem.validate();
    Tape tape;
    SpatialLoss parts;
    assemble_loss(problem, tape,
                  [&](Group, Index, const Jet& xh, const Jet& yh) { return field(xh, yh); }, parts);
    return parts;
}

SpatialLossEvaluator::SpatialLossEvaluator(const SpatialProblem& problem, const SpatialModel& model,
                                           ForwardPath path)
    : problem_(&problem), model_(&model), path_(path), interior_eval_(model.spec),
      boundary_eval_(model.spec), fiber_eval_(model.spec), anchor_eval_(model.spec) {
    problem.validate();
    if (model.spec.input_dim != 2 || model.spec.output_dim != kFieldCount) {
        throw UsageError("spatial model must map 2 inputs to 5 outputs");
    }
    const Scaling s = problem.scaling();
    interior_ = problem.interior;
    n_top_ = problem.top.cols();
    boundary_.resize(2, n_top_ + problem.bottom.cols());
    boundary_ << problem.top, problem.bottom;
    n_comp_ = static_cast<Index>(problem.compression.points.size());
    fibers_.resize(2, n_comp_ + static_cast<Index>(problem.tension.points.size()));
    Index k = 0;
    for (const auto* scan : {&problem.compression, &problem.tension}) {
        for (const auto& p : scan->points) fibers_.col(k++) << s.xh(p.x), s.yh(p.y);
    }
    if (model.transform.has_anchor()) {
        anchor_.resize(2, 1);
        anchor_ << model.transform.anchor[0], model.transform.anchor[1];
    }
}

SpatialLoss SpatialLossEvaluator::evaluate(const network::ParamStore& params,
                                           std::vector<double>* grad) {
    const SpatialModel& model = *model_;
    tape_.clear();
    SpatialLoss parts;

    if (path_ == ForwardPath::tape) {
        SpatialModel m = model;
        m.params = params;
        const network::BoundParams bound = network::bind_params(tape_, params);
        const auto anchor = anchor_outputs(m, tape_, bound);
        Var total = assemble_loss(*problem_, tape_,
                                  [&](Group, Index, const Jet& xh, const Jet& yh) {
                                      return tape_fields(m, bound, anchor, xh, yh);
                                  },
                                  parts);
        if (grad) {
            *grad = tape_.backward(total);
            grad->resize(params.flat.size());
        }
        return parts;
    }

    struct Batch {
        network::BatchEvaluator* eval;
        const Eigen::MatrixXd* points;
        int order;
        std::optional<network::BatchLeaves> leaves;
    };
    std::array<Batch, 4> batches{Batch{&interior_eval_, &interior_, 1, {}},
                                 Batch{&boundary_eval_, &boundary_, 0, {}},
                                 Batch{&fiber_eval_, &fibers_, 1, {}},
                                 Batch{&anchor_eval_, &anchor_, 0, {}}};
    for (auto& b : batches) {
        if (b.points->cols() == 0) continue;
        b.leaves.emplace(tape_, b.eval->forward(params, *b.points, b.order), 2, b.order);
    }
    std::vector<Var> anchor;
    if (batches[3].leaves) {
        for (int k = 0; k < kFieldCount; ++k) anchor.push_back(batches[3].leaves->jet(0, k).value);
    }

    std::vector<Jet> raw(kFieldCount);
    const FieldSource source = [&](Group g, Index i, const Jet& xh, const Jet& yh) {
        const network::BatchLeaves* leaves = nullptr;
        Index col = i;
        switch (g) {
        case Group::interior: leaves = &*batches[0].leaves; break;
        case Group::top: leaves = &*batches[1].leaves; break;
        case Group::bottom: leaves = &*batches[1].leaves; col = n_top_ + i; break;
        case Group::fiber_compression: leaves = &*batches[2].leaves; break;
        case Group::fiber_tension: leaves = &*batches[2].leaves; col = n_comp_ + i; break;
        }
        for (int k = 0; k < kFieldCount; ++k) raw[k] = leaves->jet(col, k);
        const std::array<Jet, 2> x{xh, yh};
        return to_fields(network::apply_transform(model.transform, x, raw, anchor));
    };
    Var total = assemble_loss(*problem_, tape_, source, parts);
    if (!grad) return parts;

    const std::vector<double> g = tape_.backward(total);
    grad->assign(params.flat.size(), 0.0);
    for (auto& b : batches) {
        if (!b.leaves) continue;
        b.leaves->gather_adjoint(g, adjoint_);
        b.eval->backward(params, adjoint_, *grad);
    }
    return parts;
}

optim::OptimConfig default_optim() {
    optim::OptimConfig c;
    c.adam_epochs = 2000;
    c.lbfgs_max_iters = 3000;
    return c;
}

SpatialLoss loss_spatial(const SpatialProblem& problem, const SpatialModel& model, ForwardPath path) {
    SpatialLossEvaluator ev(problem, model, path);
    return ev.evaluate(model.params, nullptr);
}

optim::Objective make_objective(const SpatialProblem& problem, const SpatialModel& model) {
    auto model_copy = std::make_shared<SpatialModel>(model);
    auto ev = std::make_shared<SpatialLossEvaluator>(problem, *model_copy);
    auto scratch = std::make_shared<network::ParamStore>(model.params);
    optim::Objective obj;
    obj.component_names = spatial_component_names();
    obj.evaluate = [ev, scratch, model_copy](std::span<const double> x, optim::Evaluation& e) {
        std::copy(x.begin(), x.end(), scratch->flat.begin());
        const SpatialLoss l = ev->evaluate(*scratch, &e.gradient);
        e.value = l.total;
        e.components = {l.pde, l.bc, l.exp_c, l.exp_t, l.rot};
        e.extras.clear();
    };
    return obj;
}

SpatialTrainResult train_spatial(const SpatialProblem& problem, SpatialModel model,
                                 const optim::OptimConfig& config) {
    const optim::Objective obj = make_objective(problem, model);
    optim::OptimResult r = optim::train_schedule(obj, model.params.flat, config);
    model.params.flat = std::move(r.x);
    return {std::move(model), std::move(r.history), r.status, std::move(r.message)};
}

// ---------------------------------------------------------------------------
// Prediction

std::vector<FieldSample> predict_field(const SpatialModel& model, const Eigen::Matrix2Xd& points) {
    const Scaling& s = model.scaling;
    const Index n = points.cols();
    std::vector<FieldSample> out(static_cast<std::size_t>(n));
    if (n == 0) return out;
    Eigen::MatrixXd hat(2, n);
    for (Index i = 0; i < n; ++i) hat.col(i) << s.xh(points(0, i)), s.yh(points(1, i));

    network::BatchEvaluator ev(model.spec);
    Tape tape;
    std::vector<Var> anchor;
    std::optional<network::BatchLeaves> anchor_leaves;
    if (model.transform.has_anchor()) {
        Eigen::MatrixXd a(2, 1);
        a << model.transform.anchor[0], model.transform.anchor[1];
        anchor_leaves.emplace(tape, ev.forward(model.params, a, 0), 2, 0);
        for (int k = 0; k < kFieldCount; ++k) anchor.push_back(anchor_leaves->jet(0, k).value);
    }
    const network::BatchLeaves leaves(tape, ev.forward(model.params, hat, 1), 2, 1);
    std::vector<Jet> raw(kFieldCount);
    for (Index i = 0; i < n; ++i) {
        const std::array<Jet, 2> x{autodiff::seed(tape, hat(0, i), 2, 0, 1),
                                   autodiff::seed(tape, hat(1, i), 2, 1, 1)};
        for (int k = 0; k < kFieldCount; ++k) raw[k] = leaves.jet(i, k);
        const auto f = network::apply_transform(model.transform, x, raw, anchor);
        out[i] = {points(0, i),
                  points(1, i),
                  f[kUx].value.value() * s.displacement,
                  f[kUy].value.value() * s.displacement,
                  f[kSxx].value.value() * s.stress,
                  f[kSyy].value.value() * s.stress,
                  f[kSxy].value.value() * s.stress,
                  f[kUx].d1[0].value() * kStrainUnitMicro};
    }
    return out;
}

Eigen::Matrix2Xd field_grid(const Geometry& g, int nx, int ny) {
    if (nx < 1 || ny < 1) throw UsageError("field_grid: need at least one cell per direction");
    Eigen::Matrix2Xd p(2, nx * ny);
    int k = 0;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            p.col(k++) << -0.5 * g.length + g.length * (i + 0.5) / nx,
                -0.5 * g.height + g.height * (j + 0.5) / ny;
        }
    }
    return p;
}

std::vector<double> predict_fiber(const SpatialModel& model, const datagen::FiberScan& scan) {
    Eigen::Matrix2Xd pts(2, static_cast<Index>(scan.points.size()));
    for (std::size_t i = 0; i < scan.points.size(); ++i) pts.col(i) << scan.points[i].x, scan.points[i].y;
    std::vector<double> e;
    for (const auto& f : predict_field(model, pts)) e.push_back(f.exx);
    return e;
}

double smoothness(const std::vector<double>& v) {
    if (v.size() < 3) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        const double d = v[i + 1] - 2.0 * v[i] + v[i - 1];
        sum += d * d;
    }
    return sum / static_cast<double>(v.size() - 2);
}

} // namespace pinn::spatial

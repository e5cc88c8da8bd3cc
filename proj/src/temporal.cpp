#include "pinn/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>

namespace pinn::temporal {

using autodiff::Jet;
using autodiff::Tape;
using autodiff::UsageError;
using autodiff::Var;

void TemporalProblem::validate() const {
    if (!(t_min < t_max)) throw UsageError("temporal problem: need t_min < t_max");
    if (!(w_ode >= 0.0 && w_data >= 0.0)) throw UsageError("temporal problem: weights must be >= 0");
    if (omega_trainable && !(omega_init > 0.0)) {
        throw UsageError("temporal problem: omega^2 initial value must be > 0");
    }
    if (!omega_trainable && !(omega_sq >= 0.0)) {
        throw UsageError("temporal problem: omega^2 must be >= 0");
    }
    if (!(time_scale > 0.0 && strain_scale > 0.0)) {
        throw UsageError("temporal problem: scales must be > 0");
    }
    for (double t : collocation) {
        if (t < t_min || t > t_max) throw UsageError("temporal problem: collocation point outside domain");
    }
    if (w_ode > 0.0 && collocation.empty()) {
        throw UsageError("temporal problem: empty collocation set with w_ode > 0");
    }
    if (w_data > 0.0 && data.samples.empty()) {
        throw UsageError("temporal problem: empty data set with w_data > 0");
    }
}

std::vector<double> uniform_collocation(double t_min, double t_max, int n) {
    if (n < 2) throw UsageError("uniform_collocation: need at least two points");
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = t_min + (t_max - t_min) * static_cast<double>(i) / (n - 1);
    return t;
}

double TemporalModel::omega_sq(double fallback) const {
    return omega_trainable() ? std::exp(params.extra(kLogOmegaSq)) : fallback;
}

TemporalModel make_model(const TemporalProblem& problem, network::Activation activation,
                         std::uint64_t seed, std::vector<int> hidden) {
    TemporalModel m;
    m.spec.input_dim = 1;
    m.spec.output_dim = 1;
    m.spec.hidden_layers = std::move(hidden);
    m.spec.activation = activation;
    m.spec.seed = seed;
    m.params = network::init_glorot(m.spec);
    m.time_offset = problem.time_offset;
    m.time_scale = problem.time_scale;
    m.strain_scale = problem.strain_scale;
    if (problem.omega_trainable) m.params.add_extra(kLogOmegaSq, std::log(problem.omega_init));
    return m;
}

namespace {

// Residual in scaled units: d2/dt^2 through the chain factor 1/T^2.
Var scaled_residual(const Jet& s, Var omega_sq, double time_scale) {
    if (s.order != 2 || s.dim != 1) throw UsageError("ode_residual: need a 1-D jet of order 2");
    return s.d2[0] * (1.0 / (time_scale * time_scale)) + omega_sq * s.value;
}

} // namespace

Var ode_residual(const Jet& scaled_strain, Var omega_sq, double time_scale, double strain_scale) {
    return scaled_residual(scaled_strain, omega_sq, time_scale) * strain_scale;
}

Var ode_residual(const TemporalModel& model, const TemporalProblem& problem, Tape& tape, double t) {
    const network::BoundParams bound = network::bind_params(tape, model.params);
    const Jet x = autodiff::seed(tape, (t - model.time_offset) / model.time_scale, 1, 0, 2);
    const Jet out = network::forward(model.spec, model.params, bound, std::span<const Jet>(&x, 1))[0];
    Var w = model.omega_trainable()
                ? tape.exp(bound.vars[model.params.extra_index(kLogOmegaSq)])
                : tape.constant(problem.omega_sq);
    return ode_residual(out, w, model.time_scale, model.strain_scale);
}

TemporalLossEvaluator::TemporalLossEvaluator(const TemporalProblem& problem,
                                             const TemporalModel& model, ForwardPath path)
    : problem_(&problem), spec_(model.spec), path_(path), time_offset_(model.time_offset), time_scale_(model.time_scale),
      strain_scale_(model.strain_scale), trainable_(model.omega_trainable()),
      colloc_eval_(model.spec), data_eval_(model.spec) {
    problem.validate();
    if (spec_.input_dim != 1 || spec_.output_dim != 1) {
        throw UsageError("temporal model must map one input to one output");
    }
    if (trainable_ != problem.omega_trainable) {
        throw UsageError("temporal model and problem disagree on a trainable omega^2");
    }
    if (trainable_) omega_index_ = model.params.extra_index(kLogOmegaSq);
    const auto& c = problem.collocation;
    colloc_points_.resize(1, static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i) colloc_points_(0, i) = (c[i] - time_offset_) / time_scale_;
    const auto& d = problem.data.samples;
    data_points_.resize(1, static_cast<Eigen::Index>(d.size()));
    targets_.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        data_points_(0, i) = (d[i].t - time_offset_) / time_scale_;
        targets_[i] = d[i].strain / strain_scale_;
    }
}

TemporalLoss TemporalLossEvaluator::evaluate(const network::ParamStore& params,
                                             std::vector<double>* grad) {
    if (path_ == ForwardPath::tape) return evaluate_tape(params, grad);

    const TemporalProblem& p = *problem_;
    const bool use_ode = !p.collocation.empty();
    const bool use_data = !p.data.samples.empty();
    tape_.clear();

    // Leaf registration order: collocation outputs, data outputs, log omega^2.
    std::optional<network::BatchLeaves> colloc_leaves, data_leaves;
    if (use_ode) {
        colloc_leaves.emplace(tape_, colloc_eval_.forward(params, colloc_points_, 2), 1, 2);
    }
    if (use_data) {
        data_leaves.emplace(tape_, data_eval_.forward(params, data_points_, 0), 1, 0);
    }
    Var log_w;
    Var w;
    if (trainable_) {
        log_w = tape_.param(params.flat[omega_index_]);
        w = tape_.exp(log_w);
    } else {
        w = tape_.constant(p.omega_sq);
    }

    Var l_ode = tape_.constant(0.0);
    if (use_ode) {
        const auto n = colloc_points_.cols();
        for (Eigen::Index i = 0; i < n; ++i) {
            l_ode = l_ode + autodiff::square(scaled_residual(colloc_leaves->jet(i, 0), w, time_scale_));
        }
        l_ode = l_ode * (1.0 / static_cast<double>(n));
    }
    Var l_data = tape_.constant(0.0);
    if (use_data) {
        const auto n = data_points_.cols();
        for (Eigen::Index i = 0; i < n; ++i) {
            l_data = l_data + autodiff::square(data_leaves->jet(i, 0).value - targets_[i]);
        }
        l_data = l_data * (1.0 / static_cast<double>(n));
    }
    Var total = l_ode * p.w_ode + l_data * p.w_data;

    TemporalLoss out{total.value(), l_ode.value(), l_data.value()};
    if (!grad) return out;

    const std::vector<double> g = tape_.backward(total);
    grad->assign(params.flat.size(), 0.0);
    if (use_ode) {
        colloc_leaves->gather_adjoint(g, adjoint_);
        colloc_eval_.backward(params, adjoint_, *grad);
    }
    if (use_data) {
        data_leaves->gather_adjoint(g, adjoint_);
        data_eval_.backward(params, adjoint_, *grad);
    }
    if (trainable_) (*grad)[omega_index_] = g.back();
    return out;
}

TemporalLoss TemporalLossEvaluator::evaluate_tape(const network::ParamStore& params,
                                                  std::vector<double>* grad) {
    const TemporalProblem& p = *problem_;
    tape_.clear();
    const network::BoundParams bound = network::bind_params(tape_, params);
    Var w = trainable_ ? tape_.exp(bound.vars[omega_index_]) : tape_.constant(p.omega_sq);

    auto eval_at = [&](double th, int order) {
        const Jet x = autodiff::seed(tape_, th, 1, 0, order);
        return network::forward(spec_, params, bound, std::span<const Jet>(&x, 1))[0];
    };
    Var l_ode = tape_.constant(0.0);
    if (!p.collocation.empty()) {
        for (Eigen::Index i = 0; i < colloc_points_.cols(); ++i) {
            l_ode = l_ode + autodiff::square(scaled_residual(eval_at(colloc_points_(0, i), 2), w, time_scale_));
        }
        l_ode = l_ode * (1.0 / static_cast<double>(colloc_points_.cols()));
    }
    Var l_data = tape_.constant(0.0);
    if (!p.data.samples.empty()) {
        for (Eigen::Index i = 0; i < data_points_.cols(); ++i) {
            l_data = l_data + autodiff::square(eval_at(data_points_(0, i), 0).value - targets_[i]);
        }
        l_data = l_data * (1.0 / static_cast<double>(data_points_.cols()));
    }
    Var total = l_ode * p.w_ode + l_data * p.w_data;
    TemporalLoss out{total.value(), l_ode.value(), l_data.value()};
    if (grad) *grad = tape_.backward(total);
    return out;
}

optim::OptimConfig default_optim() {
    optim::OptimConfig c;
    c.adam_epochs = 5000;
    c.lbfgs_max_iters = 40000;
    return c;
}

TemporalLoss loss_temporal(const TemporalProblem& problem, const TemporalModel& model) {
    TemporalLossEvaluator ev(problem, model);
    return ev.evaluate(model.params, nullptr);
}

optim::Objective make_objective(const TemporalProblem& problem, const TemporalModel& model,
                                ForwardPath path) {
    auto ev = std::make_shared<TemporalLossEvaluator>(problem, model, path);
    auto scratch = std::make_shared<network::ParamStore>(model.params);
    const bool trainable = model.omega_trainable();
    const std::size_t wi = trainable ? model.params.extra_index(kLogOmegaSq) : 0;
    optim::Objective obj;
    obj.component_names = {"ode", "data"};
    if (trainable) obj.extra_names = {"omega_sq"};
    obj.evaluate = [ev, scratch, trainable, wi](std::span<const double> x, optim::Evaluation& e) {
        std::copy(x.begin(), x.end(), scratch->flat.begin());
        const TemporalLoss l = ev->evaluate(*scratch, &e.gradient);
        e.value = l.total;
        e.components = {l.ode, l.data};
        e.extras.clear();
        if (trainable) e.extras.push_back(std::exp(x[wi]));
    };
    return obj;
}

TrainResult train_temporal(const TemporalProblem& problem, TemporalModel model,
                           const optim::OptimConfig& config) {
    const optim::Objective obj = make_objective(problem, model);
    optim::OptimResult r = optim::train_schedule(obj, model.params.flat, config);
    model.params.flat = std::move(r.x);
    return {std::move(model), std::move(r.history), r.status, std::move(r.message)};
}

Identification identify_omega(const TemporalProblem& problem, TemporalModel model,
                              const optim::OptimConfig& config) {
    if (!problem.omega_trainable || !model.omega_trainable()) {
        throw UsageError("identify_omega: omega^2 must be trainable");
    }
    if (problem.data.samples.empty()) throw UsageError("identify_omega: no data");
    Identification id;
    id.training = train_temporal(problem, std::move(model), config);
    id.omega_sq_final = id.training.model.omega_sq(problem.omega_sq);
    id.trajectory.reserve(id.training.history.records.size());
    for (const auto& rec : id.training.history.records) id.trajectory.push_back(rec.extras.at(0));
    return id;
}

std::vector<double> predict_strain(const TemporalModel& model, const std::vector<double>& times) {
    if (times.empty()) return {};
    Eigen::MatrixXd pts(1, static_cast<Eigen::Index>(times.size()));
    for (std::size_t i = 0; i < times.size(); ++i) pts(0, i) = (times[i] - model.time_offset) / model.time_scale;
    network::BatchEvaluator ev(model.spec);
    const Eigen::MatrixXd& out = ev.forward(model.params, pts, 0);
    std::vector<double> s(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) s[i] = out(0, i) * model.strain_scale;
    return s;
}

double relative_l2(const std::vector<double>& pred, const std::vector<double>& ref) {
    if (pred.size() != ref.size() || ref.empty()) throw UsageError("relative_l2: size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        num += (pred[i] - ref[i]) * (pred[i] - ref[i]);
        den += ref[i] * ref[i];
    }
    return std::sqrt(num / den);
}

} // namespace pinn::temporal

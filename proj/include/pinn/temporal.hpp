#pragma once

/// \file temporal.hpp
///
/// Temporal reduced-order model: a network eps(t) fit to sensor strain under
/// the undamped oscillator equation eps'' + omega^2 eps = 0, the data-only
/// baseline and inverse identification of omega^2.

#include "pinn/autodiff.hpp"
#include "pinn/datagen.hpp"
#include "pinn/network.hpp"
#include "pinn/optim.hpp"

#include <vector>

namespace pinn::temporal {

inline constexpr const char* kLogOmegaSq = "log_omega_sq";

struct TemporalProblem {
    double omega_sq = 9.87;       ///< [rad^2/s^2], used when not trainable
    bool omega_trainable = false;
    double omega_init = 1.0;      ///< initial omega^2 when trainable
    std::vector<double> collocation; ///< [s]
    datagen::SensorSeries data;      ///< training window
    double w_ode = 0.1;
    double w_data = 1.0;
    double t_min = 0.0;
    double t_max = 16.0;
    double time_offset = 0.0;     ///< network input is (t - time_offset) / time_scale
    double time_scale = 8.0;
    double strain_scale = 100.0;  ///< network output unit [microstrain]

    void validate() const;
};

/// n equally spaced points covering [t_min, t_max].
std::vector<double> uniform_collocation(double t_min, double t_max, int n);

struct TemporalModel {
    network::MlpSpec spec;
    network::ParamStore params;
    double time_offset = 0.0;
    double time_scale = 8.0;
    double strain_scale = 100.0;

    bool omega_trainable() const noexcept { return params.has_extra(kLogOmegaSq); }
    /// Current omega^2 when trainable, otherwise `fallback`.
    double omega_sq(double fallback) const;
};

/// 1 -> hidden -> 1 network with Glorot weights; appends log(omega_init) when
/// the problem trains omega^2.
TemporalModel make_model(const TemporalProblem& problem, network::Activation activation,
                         std::uint64_t seed, std::vector<int> hidden = {30, 30, 30});

/// Residual in [microstrain/s^2] from a jet of the scaled output taken with
/// respect to the scaled time.
autodiff::Var ode_residual(const autodiff::Jet& scaled_strain, autodiff::Var omega_sq,
                           double time_scale, double strain_scale);

/// Residual at physical time t, built on `tape` through the tape forward pass.
autodiff::Var ode_residual(const TemporalModel& model, const TemporalProblem& problem,
                           autodiff::Tape& tape, double t);

struct TemporalLoss {
    double total = 0.0;
    double ode = 0.0;  ///< mean squared residual, [(100 microstrain/s^2)^2]
    double data = 0.0; ///< mean squared misfit, [(100 microstrain)^2]
};

enum class ForwardPath { batched, tape };

/// Reusable evaluator: loss value and gradient over model.params.flat.
class TemporalLossEvaluator {
  public:
    TemporalLossEvaluator(const TemporalProblem& problem, const TemporalModel& model,
                          ForwardPath path = ForwardPath::batched);

    /// `grad` may be empty when only the value is needed.
    TemporalLoss evaluate(const network::ParamStore& params, std::vector<double>* grad);

  private:
    TemporalLoss evaluate_tape(const network::ParamStore& params, std::vector<double>* grad);

    const TemporalProblem* problem_;
    network::MlpSpec spec_;
    ForwardPath path_;
    double time_offset_, time_scale_, strain_scale_;
    bool trainable_;
    std::size_t omega_index_ = 0;
    Eigen::MatrixXd colloc_points_, data_points_;
    std::vector<double> targets_;
    network::BatchEvaluator colloc_eval_, data_eval_;
    autodiff::Tape tape_;
    Eigen::MatrixXd adjoint_;
};

/// Adam 5000 epochs followed by up to 40000 L-BFGS iterations.
optim::OptimConfig default_optim();

TemporalLoss loss_temporal(const TemporalProblem& problem, const TemporalModel& model);

optim::Objective make_objective(const TemporalProblem& problem, const TemporalModel& model,
                                ForwardPath path = ForwardPath::batched);

struct TrainResult {
    TemporalModel model;
    optim::TrainHistory history;
    optim::Status status = optim::Status::completed;
    std::string message;
};

TrainResult train_temporal(const TemporalProblem& problem, TemporalModel model,
                           const optim::OptimConfig& config);

struct Identification {
    double omega_sq_final = 0.0;
    std::vector<double> trajectory; ///< omega^2 per history record
    TrainResult training;
};

Identification identify_omega(const TemporalProblem& problem, TemporalModel model,
                              const optim::OptimConfig& config);

/// Strain [microstrain] at each time; pure evaluation.
std::vector<double> predict_strain(const TemporalModel& model, const std::vector<double>& times);

/// ||pred - ref|| / ||ref||.
double relative_l2(const std::vector<double>& pred, const std::vector<double>& ref);

} // namespace pinn::temporal

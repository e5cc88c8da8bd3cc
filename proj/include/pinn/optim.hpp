#pragma once

/// \file optim.hpp
///
/// Full-batch gradient optimizers: Adam followed by limited-memory BFGS with a
/// strong Wolfe line search.

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pinn::optim {

struct OptimConfig {
    double adam_lr = 1e-3;
    int adam_epochs = 5000;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int lbfgs_memory = 20;
    int lbfgs_max_iters = 5000;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    double grad_tol = 1e-9;
    double ftol_rel = 1e-12;
    int max_line_search_evals = 25;

    /// Throws std::invalid_argument on violated invariants.
    void validate() const;
};

/// Result of one objective evaluation.
struct Evaluation {
    double value = 0.0;
    std::vector<double> gradient;
    std::vector<double> components; ///< named loss terms
    std::vector<double> extras;     ///< named derived quantities, e.g. omega_sq
};

struct Objective {
    std::function<void(std::span<const double> x, Evaluation& out)> evaluate;
    std::vector<std::string> component_names;
    std::vector<std::string> extra_names;
};

enum class Phase { adam, lbfgs };
const char* phase_name(Phase p) noexcept;

struct HistoryRecord {
    Phase phase;
    int iteration;
    double loss;
    std::vector<double> components;
    std::vector<double> extras;
    double wall_time_s;
};

struct TrainHistory {
    std::vector<std::string> component_names;
    std::vector<std::string> extra_names;
    std::vector<HistoryRecord> records;

    void append(const TrainHistory& other);
    /// Columns: phase,iter,loss_total,loss_component_*,extra_param_*,wall_time_s
    void write_csv(std::ostream& os, bool include_wall_time = true) const;
};

enum class Status {
    converged_gradient,
    converged_ftol,
    max_iterations,
    line_search_failed,
    diverged,
    completed, ///< Adam ran all its epochs
};
const char* status_name(Status s) noexcept;

/// Both Wolfe inequalities as evaluated for one accepted L-BFGS step.
struct StepCertificate {
    double step;
    double f0, slope0; ///< f(x) and g(x)'p
    double f1, slope1; ///< f(x + step p) and g(x + step p)'p
};

struct OptimResult {
    std::vector<double> x;
    TrainHistory history;
    Status status = Status::completed;
    std::string message;
    double final_loss = 0.0;
    int evaluations = 0;
    std::vector<StepCertificate> steps; ///< L-BFGS only
};

OptimResult adam_run(const Objective& objective, std::vector<double> x, const OptimConfig& config);
OptimResult lbfgs_run(const Objective& objective, std::vector<double> x, const OptimConfig& config);
/// Adam, then L-BFGS from the Adam result; histories concatenated.
OptimResult train_schedule(const Objective& objective, std::vector<double> x,
                           const OptimConfig& config);

/// One-dimensional strong Wolfe search along `direction` (Nocedal & Wright
/// bracketing + zoom with cubic interpolation).
struct LineSearchResult {
    bool ok = false;
    double step = 0.0;
    Evaluation eval;
    int evaluations = 0;
};
LineSearchResult strong_wolfe_search(const Objective& objective, std::span<const double> x,
                                     const Evaluation& at_x, std::span<const double> direction,
                                     double initial_step, const OptimConfig& config);

} // namespace pinn::optim

#include "pinn/optim.hpp"

#include <algorithm>
#include <string_view>
#include <charconv>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace pinn::optim {

void OptimConfig::validate() const {
    if (!(adam_lr > 0.0)) throw std::invalid_argument("adam_lr must be > 0");
    if (adam_epochs < 0) throw std::invalid_argument("adam_epochs must be >= 0");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
        throw std::invalid_argument("adam betas must lie in [0, 1)");
    }
    if (lbfgs_memory < 1) throw std::invalid_argument("lbfgs_memory must be >= 1");
    if (lbfgs_max_iters < 0) throw std::invalid_argument("lbfgs_max_iters must be >= 0");
    if (!(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0)) {
        throw std::invalid_argument("Wolfe constants must satisfy 0 < c1 < c2 < 1");
    }
    if (max_line_search_evals < 1) throw std::invalid_argument("max_line_search_evals must be >= 1");
}

const char* phase_name(Phase p) noexcept { return p == Phase::adam ? "adam" : "lbfgs"; }

const char* status_name(Status s) noexcept {
    switch (s) {
    case Status::converged_gradient: return "converged_gradient";
    case Status::converged_ftol: return "converged_ftol";
    case Status::max_iterations: return "max_iterations";
    case Status::line_search_failed: return "line_search_failed";
    case Status::diverged: return "diverged";
    case Status::completed: return "completed";
    }
    return "?";
}

void TrainHistory::append(const TrainHistory& other) {
    if (component_names.empty() && extra_names.empty()) {
        component_names = other.component_names;
        extra_names = other.extra_names;
    }
    records.insert(records.end(), other.records.begin(), other.records.end());
}

void TrainHistory::write_csv(std::ostream& os, bool include_wall_time) const {
    os << "phase,iter,loss_total";
    for (const auto& n : component_names) os << ",loss_component_" << n;
    for (const auto& n : extra_names) os << ",extra_param_" << n;
    if (include_wall_time) os << ",wall_time_s";
    os << "\n";
    char buf[32];
    auto put = [&](double v) {
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        os << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    };
    for (const auto& r : records) {
        os << phase_name(r.phase) << ',' << r.iteration;
        put(r.loss);
        for (double c : r.components) put(c);
        for (double e : r.extras) put(e);
        if (include_wall_time) put(r.wall_time_s);
        os << "\n";
    }
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool finite_eval(const Evaluation& e) {
    if (!std::isfinite(e.value)) return false;
    return std::all_of(e.gradient.begin(), e.gradient.end(),
                       [](double g) { return std::isfinite(g); });
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

Evaluation evaluate(const Objective& obj, std::span<const double> x) {
    Evaluation e;
    e.gradient.assign(x.size(), 0.0);
    obj.evaluate(x, e);
    if (e.gradient.size() != x.size()) throw std::logic_error("objective returned wrong gradient size");
    return e;
}

TrainHistory empty_history(const Objective& obj) {
    TrainHistory h;
    h.component_names = obj.component_names;
    h.extra_names = obj.extra_names;
    return h;
}

void record(TrainHistory& h, Phase phase, int iter, const Evaluation& e, Clock::time_point t0) {
    h.records.push_back({phase, iter, e.value, e.components, e.extras, seconds_since(t0)});
}

} // namespace

OptimResult adam_run(const Objective& objective, std::vector<double> x, const OptimConfig& config) {
    config.validate();
    const auto t0 = Clock::now();
    OptimResult res;
    res.history = empty_history(objective);
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0), v(n, 0.0);
    double b1t = 1.0, b2t = 1.0;

    Evaluation e = evaluate(objective, x);
    ++res.evaluations;
    if (!finite_eval(e)) {
        res.x = std::move(x);
        res.status = Status::diverged;
        res.message = "objective is not finite at the starting point";
        res.final_loss = e.value;
        return res;
    }
    record(res.history, Phase::adam, 0, e, t0);

    for (int t = 1; t <= config.adam_epochs; ++t) {
        b1t *= config.adam_beta1;
        b2t *= config.adam_beta2;
        std::vector<double> next = x;
        for (std::size_t i = 0; i < n; ++i) {
            const double g = e.gradient[i];
            m[i] = config.adam_beta1 * m[i] + (1.0 - config.adam_beta1) * g;
            v[i] = config.adam_beta2 * v[i] + (1.0 - config.adam_beta2) * g * g;
            const double mhat = m[i] / (1.0 - b1t);
            const double vhat = v[i] / (1.0 - b2t);
            next[i] -= config.adam_lr * mhat / (std::sqrt(vhat) + config.adam_eps);
        }
        Evaluation en = evaluate(objective, next);
        ++res.evaluations;
        if (!finite_eval(en)) {
            res.status = Status::diverged;
            res.message = "non-finite objective at Adam epoch " + std::to_string(t);
            break;
        }
        x = std::move(next);
        e = std::move(en);
        record(res.history, Phase::adam, t, e, t0);
    }
    res.final_loss = e.value;
    res.x = std::move(x);
    return res;
}

// ---------------------------------------------------------------------------
// Line search

namespace {

struct Sample {
    double step;
    double f;
    double slope;
};

// Minimizer of the cubic interpolating (a.f, a.slope) and (b.f, b.slope),
// safeguarded to stay inside the interval away from its ends.
double cubic_step(const Sample& a, const Sample& b) {
    const double lo = std::min(a.step, b.step);
    const double hi = std::max(a.step, b.step);
    const double margin = 0.1 * (hi - lo);
    const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.step - b.step);
    const double disc = d1 * d1 - a.slope * b.slope;
    double t = 0.5 * (lo + hi);
    if (disc >= 0.0) {
        const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
        const double denom = b.slope - a.slope + 2.0 * d2;
        if (denom != 0.0) {
            const double cand = b.step - (b.step - a.step) * (b.slope + d2 - d1) / denom;
            if (std::isfinite(cand)) t = cand;
        }
    }
    return std::clamp(t, lo + margin, hi - margin);
}

} // namespace

LineSearchResult strong_wolfe_search(const Objective& objective, std::span<const double> x,
                                     const Evaluation& at_x, std::span<const double> direction,
                                     double initial_step, const OptimConfig& config) {
    LineSearchResult res;
    const double f0 = at_x.value;
    const double slope0 = dot(at_x.gradient, direction);
    if (!(slope0 < 0.0)) return res;
    const double c1 = config.wolfe_c1;
    const double c2 = config.wolfe_c2;

    std::vector<double> trial(x.size());
    auto probe = [&](double step, Evaluation& e) -> Sample {
        for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + step * direction[i];
        e = evaluate(objective, trial);
        ++res.evaluations;
        if (!finite_eval(e)) return {step, std::numeric_limits<double>::infinity(), 0.0};
        return {step, e.value, dot(e.gradient, direction)};
    };
    auto armijo = [&](const Sample& s) { return s.f <= f0 + c1 * s.step * slope0; };
    auto curvature = [&](const Sample& s) { return std::abs(s.slope) <= -c2 * slope0; };

    auto zoom = [&](Sample lo, Sample hi) -> bool {
        while (res.evaluations < config.max_line_search_evals) {
            if (std::abs(hi.step - lo.step) <= 1e-16 * std::max(1.0, std::abs(lo.step))) return false;
            double step;
            if (std::isfinite(hi.f)) {
                step = cubic_step(lo, hi);
            } else {
                step = 0.5 * (lo.step + hi.step);
            }
            Evaluation e;
            const Sample s = probe(step, e);
            if (!std::isfinite(s.f) || !armijo(s) || s.f >= lo.f) {
                hi = s;
            } else {
                if (curvature(s)) {
                    res.ok = true;
                    res.step = s.step;
                    res.eval = std::move(e);
                    return true;
                }
                if (s.slope * (hi.step - lo.step) >= 0.0) hi = lo;
                lo = s;
            }
        }
        return false;
    };

    Sample prev{0.0, f0, slope0};
    double step = initial_step;
    for (int i = 0; res.evaluations < config.max_line_search_evals; ++i) {
        Evaluation e;
        const Sample s = probe(step, e);
        if (!std::isfinite(s.f)) {
            // Overshot into a non-finite region; bisect back toward prev.
            zoom(prev, s);
            return res;
        }
        if (!armijo(s) || (i > 0 && s.f >= prev.f)) {
            zoom(prev, s);
            return res;
        }
        if (curvature(s)) {
            res.ok = true;
            res.step = s.step;
            res.eval = std::move(e);
            return res;
        }
        if (s.slope >= 0.0) {
            zoom(s, prev);
            return res;
        }
        prev = s;
        step *= 2.0;
    }
    return res;
}

// ---------------------------------------------------------------------------
// L-BFGS

OptimResult lbfgs_run(const Objective& objective, std::vector<double> x, const OptimConfig& config) {
    config.validate();
    const auto t0 = Clock::now();
    OptimResult res;
    res.history = empty_history(objective);
    const std::size_t n = x.size();

    Evaluation e = evaluate(objective, x);
    ++res.evaluations;
    if (!finite_eval(e)) {
        res.x = std::move(x);
        res.status = Status::diverged;
        res.message = "objective is not finite at the starting point";
        res.final_loss = e.value;
        return res;
    }
    record(res.history, Phase::lbfgs, 0, e, t0);
    res.status = Status::max_iterations;

    struct Pair {
        std::vector<double> s, y;
        double rho;
    };
    std::deque<Pair> memory;
    std::vector<double> dir(n), alpha(config.lbfgs_memory);

    for (int k = 0; k < config.lbfgs_max_iters; ++k) {
        if (max_abs(e.gradient) <= config.grad_tol) {
            res.status = Status::converged_gradient;
            break;
        }
        // Two-loop recursion: dir = -H g.
        for (std::size_t i = 0; i < n; ++i) dir[i] = -e.gradient[i];
        for (std::size_t j = memory.size(); j-- > 0;) {
            alpha[j] = memory[j].rho * dot(memory[j].s, dir);
            for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha[j] * memory[j].y[i];
        }
        if (!memory.empty()) {
            const auto& last = memory.back();
            const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
            for (double& d : dir) d *= gamma;
        }
        for (std::size_t j = 0; j < memory.size(); ++j) {
            const double beta = memory[j].rho * dot(memory[j].y, dir);
            for (std::size_t i = 0; i < n; ++i) dir[i] += (alpha[j] - beta) * memory[j].s[i];
        }
        double slope = dot(e.gradient, dir);
        if (!(slope < 0.0)) {
            memory.clear();
            for (std::size_t i = 0; i < n; ++i) dir[i] = -e.gradient[i];
            slope = dot(e.gradient, dir);
        }
        double step0 = 1.0;
        if (memory.empty()) step0 = std::min(1.0, 1.0 / std::sqrt(dot(e.gradient, e.gradient)));

        LineSearchResult ls = strong_wolfe_search(objective, x, e, dir, step0, config);
        res.evaluations += ls.evaluations;
        if (!ls.ok) {
            res.status = Status::line_search_failed;
            res.message = "no strong Wolfe step found at iteration " + std::to_string(k + 1);
            break;
        }
        res.steps.push_back({ls.step, e.value, slope, ls.eval.value, dot(ls.eval.gradient, dir)});

        Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            p.s[i] = ls.step * dir[i];
            p.y[i] = ls.eval.gradient[i] - e.gradient[i];
        }
        const double sy = dot(p.s, p.y);
        if (sy > 0.0) {
            p.rho = 1.0 / sy;
            memory.push_back(std::move(p));
            if (static_cast<int>(memory.size()) > config.lbfgs_memory) memory.pop_front();
        }
        for (std::size_t i = 0; i < n; ++i) x[i] += ls.step * dir[i];
        const double f_prev = e.value;
        e = std::move(ls.eval);
        record(res.history, Phase::lbfgs, k + 1, e, t0);

        if (max_abs(e.gradient) <= config.grad_tol) {
            res.status = Status::converged_gradient;
            break;
        }
        const double scale = std::max({std::abs(f_prev), std::abs(e.value), 1.0});
        if ((f_prev - e.value) / scale <= config.ftol_rel) {
            res.status = Status::converged_ftol;
            break;
        }
    }
    res.final_loss = e.value;
    res.x = std::move(x);
    return res;
}

OptimResult train_schedule(const Objective& objective, std::vector<double> x,
                           const OptimConfig& config) {
    OptimResult adam = adam_run(objective, std::move(x), config);
    if (adam.status == Status::diverged) return adam;
    OptimResult lbfgs = lbfgs_run(objective, adam.x, config);
    OptimResult out = std::move(lbfgs);
    TrainHistory h = std::move(adam.history);
    h.append(out.history);
    out.history = std::move(h);
    out.evaluations += adam.evaluations;
    return out;
}

} // namespace pinn::optim

#pragma once

/// \file spatial.hpp
///
/// Spatial reduced-order model: a mixed displacement/stress network over the
/// relaxed 2-D beam, trained on plane elasticity residuals, soft traction
/// conditions on the top and bottom edges and fiber strain data.
///
/// Everything inside the loss is nondimensional:
///   xh = 2x/l, yh = 2y/h, sigma = sigma_ref * sh, u = u_ref * uh,
///   sigma_ref = 1e-4 E, u_ref = 1e-4 l/2,
/// so strains come out in units of 1e-4 (100 microstrain).

#include "pinn/autodiff.hpp"
#include "pinn/beam.hpp"
#include "pinn/datagen.hpp"
#include "pinn/network.hpp"
#include "pinn/optim.hpp"
#include "pinn/oracle.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <vector>

namespace pinn::spatial {

enum Field { kUx = 0, kUy = 1, kSxx = 2, kSyy = 3, kSxy = 4 };
inline constexpr int kFieldCount = 5;

using FieldJets = std::array<autodiff::Jet, kFieldCount>;

struct Scaling {
    double half_length = 1.5;
    double half_height = 0.15;
    double stress = 2.9e6;      ///< [Pa]
    double displacement = 1.5e-4; ///< [m]
    double aspect = 10.0;       ///< l / h
    double lambda_hat = 0.0;    ///< lambda / E
    double mu_hat = 0.0;        ///< mu / E

    static Scaling from(const Geometry& g, const Material& m);
    double xh(double x) const noexcept { return x / half_length; }
    double yh(double y) const noexcept { return y / half_height; }
};

inline constexpr double kStrainUnitMicro = 100.0; ///< 1e-4 in microstrain

struct SpatialWeights {
    double pde = 1.0;
    double bc = 1.0;
    double exp_c = 1.0;
    double exp_t = 1.0;
    double rot = 1e-2;
};

/// Which data enter the loss: 1 compression only, 2 compression and
/// undamaged tension, 3 like 2 with the tension weight reduced to 0.01.
int validate_scenario(int scenario);

struct SpatialProblem {
    Geometry geometry;
    Material material;
    std::vector<TractionBC> bcs;
    Eigen::Matrix2Xd interior;       ///< hat coordinates
    Eigen::Matrix2Xd body_force;     ///< hat units, one column per interior point
    Eigen::Matrix2Xd top, bottom;    ///< hat coordinates
    Eigen::Matrix2Xd top_traction;   ///< target sigma.n in hat units
    Eigen::Matrix2Xd bottom_traction;
    datagen::FiberScan compression;
    datagen::FiberScan tension;      ///< empty when unused
    SpatialWeights weights;
    int scenario = 1;

    Scaling scaling() const { return Scaling::from(geometry, material); }
    void validate() const;
};

struct CollocationCounts {
    int interior = 4000;
    int per_edge = 200;
    std::uint64_t seed = 1234;
};

/// Interior points drawn uniformly in mirrored pairs (xh, yh), (-xh, yh);
/// edge points at evenly spaced midpoints. Hat coordinates.
Eigen::Matrix2Xd interior_points(const CollocationCounts& counts);
Eigen::Matrix2Xd edge_points(int n, double yh);

/// Sum of the traction intervals covering x, converted to hat units.
std::array<double, 2> traction_at(const std::vector<TractionBC>& bcs, Edge edge, double x,
                                  double stress_scale);

struct BeamSetup {
    Geometry geometry;
    Material material;
    FourPointLayout layout;
    std::array<double, 2> body_force{0.0, 0.0}; ///< [N/m^3]
    CollocationCounts counts;
};

/// Four-point bending problem. `tension_all` is the full tension scan; the
/// scenario decides which of it is kept and how it is weighted.
SpatialProblem make_beam_problem(const BeamSetup& setup, const datagen::FiberScan& compression,
                                 const datagen::FiberScan& tension_all, int scenario,
                                 bool rotation_penalty = true);

/// Verification problem: body force and edge tractions of a manufactured
/// solution, no fiber data. Tractions are weighted by (l/h)^2.
SpatialProblem make_manufactured_problem(const Geometry& g, const Material& m,
                                         const oracle::ManufacturedSolution& ms,
                                         const CollocationCounts& counts,
                                         bool rotation_penalty = true);

/// Tension points outside crack intervals.
datagen::FiberScan undamaged(const datagen::FiberScan& scan);

struct SpatialModel {
    network::MlpSpec spec;
    network::ParamStore params;
    network::OutputTransform transform;
    Scaling scaling;
    bool pin_uy = true;
};

/// 2 -> hidden -> 5 network with the hard-constraint transform:
///   ux = xh N_ux, sxx = (1 - xh)(1 + xh) N_sxx, sxy = (1 - xh)(1 + xh) N_sxy,
///   uy = N_uy - N_uy(0, -1) when pinned, syy = N_syy.
SpatialModel make_spatial_model(const Geometry& g, const Material& m, std::uint64_t seed,
                                bool pin_uy = true, std::vector<int> hidden = {50, 50, 50, 50});

network::OutputTransform hard_constraint_transform(bool pin_uy);

/// Transformed fields at physical (x, y) through the tape forward pass.
FieldJets fields(const SpatialModel& model, autodiff::Tape& tape, double x, double y, int order);

/// Balance residuals in hat units for the given body force.
std::array<autodiff::Var, 2> residual_balance(const FieldJets& f, double aspect,
                                              std::array<double, 2> body_force = {0.0, 0.0});
std::array<autodiff::Var, 2> residual_balance(const SpatialModel& model, autodiff::Tape& tape,
                                              double x, double y);

/// sigma - (lambda tr(eps) I + 2 mu eps): xx, yy, xy in hat units.
std::array<autodiff::Var, 3> residual_constitutive(const FieldJets& f, const Scaling& s);
std::array<autodiff::Var, 3> residual_constitutive(const SpatialModel& model, autodiff::Tape& tape,
                                                   double x, double y);

/// d ux / dx in hat units (1e-4).
autodiff::Var strain_xx_hat(const FieldJets& f);
/// Longitudinal strain [microstrain].
autodiff::Var strain_xx(const SpatialModel& model, autodiff::Tape& tape, double x, double y);

/// In-plane rotation in hat units.
autodiff::Var rotation(const FieldJets& f, double aspect);

struct SpatialLoss {
    double total = 0.0;
    double pde = 0.0;
    double bc = 0.0;
    double exp_c = 0.0;
    double exp_t = 0.0;
    double rot = 0.0;
};

inline const std::vector<std::string>& spatial_component_names() {
    static const std::vector<std::string> names{"pde", "bc", "exp_c", "exp_t", "rot"};
    return names;
}

/// Point groups of a problem, in the order the loss visits them.
enum class Group { interior, top, bottom, fiber_compression, fiber_tension };

/// Supplies transformed field jets for point `i` of a group, given its hat
/// coordinate jets on the loss tape.
using FieldSource = std::function<FieldJets(Group group, Eigen::Index i, const autodiff::Jet& xh,
                                            const autodiff::Jet& yh)>;

/// Builds the loss on `tape` from an arbitrary field source and returns the
/// total node. Components are written to `parts`.
autodiff::Var assemble_loss(const SpatialProblem& problem, autodiff::Tape& tape,
                            const FieldSource& source, SpatialLoss& parts);

/// Loss of a closed-form field (e.g. the manufactured solution) given as
/// transformed jets of the hat coordinates.
using AnalyticField = std::function<FieldJets(const autodiff::Jet& xh, const autodiff::Jet& yh)>;
SpatialLoss loss_analytic(const SpatialProblem& problem, const AnalyticField& field);

enum class ForwardPath { batched, tape };

class SpatialLossEvaluator {
  public:
    SpatialLossEvaluator(const SpatialProblem& problem, const SpatialModel& model,
                         ForwardPath path = ForwardPath::batched);

    SpatialLoss evaluate(const network::ParamStore& params, std::vector<double>* grad);

  private:
    const SpatialProblem* problem_;
    const SpatialModel* model_;
    ForwardPath path_;
    Eigen::MatrixXd interior_, boundary_, fibers_, anchor_;
    Eigen::Index n_top_ = 0, n_comp_ = 0;
    network::BatchEvaluator interior_eval_, boundary_eval_, fiber_eval_, anchor_eval_;
    autodiff::Tape tape_;
    Eigen::MatrixXd adjoint_;
};

/// Adam 2000 epochs followed by up to 3000 L-BFGS iterations.
optim::OptimConfig default_optim();

SpatialLoss loss_spatial(const SpatialProblem& problem, const SpatialModel& model,
                         ForwardPath path = ForwardPath::batched);

optim::Objective make_objective(const SpatialProblem& problem, const SpatialModel& model);

struct SpatialTrainResult {
    SpatialModel model;
    optim::TrainHistory history;
    optim::Status status = optim::Status::completed;
    std::string message;
};

SpatialTrainResult train_spatial(const SpatialProblem& problem, SpatialModel model,
                                 const optim::OptimConfig& config);

/// Physical-unit field sample.
struct FieldSample {
    double x, y;
    double ux, uy;        ///< [m]
    double sxx, syy, sxy; ///< [Pa]
    double exx;           ///< [microstrain]
};

/// Pure evaluation at physical points (columns of `points`, meters).
std::vector<FieldSample> predict_field(const SpatialModel& model, const Eigen::Matrix2Xd& points);

/// nx x ny grid of cell-centred points over the beam.
Eigen::Matrix2Xd field_grid(const Geometry& g, int nx, int ny);

/// Predicted longitudinal strain [microstrain] at the points of a scan.
std::vector<double> predict_fiber(const SpatialModel& model, const datagen::FiberScan& scan);

/// Mean squared second difference of a sequence.
double smoothness(const std::vector<double>& v);

} // namespace pinn::spatial

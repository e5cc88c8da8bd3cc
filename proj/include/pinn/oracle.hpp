#pragma once

/// \file oracle.hpp
///
/// Closed-form references: the undamped oscillator, Euler-Bernoulli strain
/// under four-point bending and a manufactured plane elasticity solution.

#include "pinn/autodiff.hpp"
#include "pinn/beam.hpp"

#include <array>

namespace pinn::oracle {

/// amplitude * cos(sqrt(omega_sq) * t): zero initial velocity.
double harmonic_exact(double amplitude, double omega_sq, double t);

/// Longitudinal strain [microstrain] = -M(x) y / (E I).
double euler_bernoulli_strain(const spatial::Geometry& geometry, const spatial::Material& material,
                              const spatial::FourPointLayout& layout, double x, double y);

/// Manufactured solution in nondimensional coordinates xh = 2x/l, yh = 2y/h
/// on [-1, 1]^2, in the same scaled units the spatial model trains in:
///
///   ux = A xh (1 - xh^2)^2 sin(k yh)
///   uy = B (1 - xh^2)^2 (1 + yh) + W ((1 - xh^2)^3 - 1)
///
/// Every strain component vanishes on xh = +-1, ux vanishes on xh = 0 and uy
/// at (0, -1), so the field satisfies all hard constraints of the model.
/// Stresses follow Hooke's law with scaled Lame constants; the body force
/// closes the balance equations.
struct ManufacturedSolution {
    double amp_x = 0.5;
    double amp_y = 0.05;
    double amp_w = 0.65;                    ///< bending deflection W
    double wavenumber = 1.5707963267948966; ///< pi / 2
    double aspect = 10.0;                   ///< l / h
    double lambda = 0.0;                    ///< lambda / E
    double mu = 0.0;                        ///< mu / E

    /// (ux, uy, sxx, syy, sxy) as jets of the coordinate jets.
    std::array<autodiff::Jet, 5> fields(const autodiff::Jet& xh, const autodiff::Jet& yh) const;
    std::array<double, 5> evaluate(double xh, double yh) const;
    /// Scaled body force entering the balance residuals.
    std::array<double, 2> body_force(double xh, double yh) const;
    /// sigma . n on the top (n = +y) or bottom (n = -y) edge.
    std::array<double, 2> traction(spatial::Edge edge, double xh) const;
};

ManufacturedSolution manufactured_solution(const spatial::Geometry& geometry,
                                           const spatial::Material& material);

} // namespace pinn::oracle

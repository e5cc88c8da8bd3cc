#include "pinn/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace pinn::oracle {

using autodiff::Jet;

double harmonic_exact(double amplitude, double omega_sq, double t) {
    if (omega_sq < 0.0) throw std::invalid_argument("harmonic_exact: omega_sq must be >= 0");
    return amplitude * std::cos(std::sqrt(omega_sq) * t);
}

double euler_bernoulli_strain(const spatial::Geometry& geometry, const spatial::Material& material,
                              const spatial::FourPointLayout& layout, double x, double y) {
    const double ei = material.youngs_modulus * geometry.second_moment();
    return -layout.moment(x) * y / ei * 1e6;
}

// Shape functions and their derivatives:
//   g = xh (1 - xh^2)^2,   g' = (1 - xh^2)(1 - 5 xh^2),   g'' = -12 xh + 20 xh^3
//   h = (1 - xh^2)^2,      h' = -4 xh (1 - xh^2),         h'' = -4 + 12 xh^2
//   w = (1 - xh^2)^3 - 1,  w' = -6 xh (1 - xh^2)^2,   w'' = 6 (1 - xh^2)(5 xh^2 - 1)
//   p = sin(k yh),         q = 1 + yh
std::array<Jet, 5> ManufacturedSolution::fields(const Jet& xh, const Jet& yh) const {
    const Jet one_minus = -(xh * xh) + 1.0;
    const Jet h = one_minus * one_minus;
    const Jet g = xh * h;
    const Jet gp = one_minus * ((-5.0) * (xh * xh) + 1.0);
    const Jet hp = (-4.0) * (xh * one_minus);
    const Jet p = autodiff::sin(wavenumber * yh);
    const Jet pp = wavenumber * autodiff::cos(wavenumber * yh);
    const Jet q = yh + 1.0;

    const Jet ux = amp_x * (g * p);
    const Jet uy = amp_y * (h * q) + amp_w * (h * one_minus + (-1.0));
    const Jet exx = amp_x * (gp * p);
    const Jet eyy = (aspect * amp_y) * h;
    const Jet exy = 0.5 * ((aspect * amp_x) * (g * pp) + amp_y * (hp * q) - (6.0 * amp_w) * g);
    const double l2 = lambda + 2.0 * mu;
    const Jet sxx = l2 * exx + lambda * eyy;
    const Jet syy = lambda * exx + l2 * eyy;
    const Jet sxy = (2.0 * mu) * exy;
    return {ux, uy, sxx, syy, sxy};
}

std::array<double, 5> ManufacturedSolution::evaluate(double xh, double yh) const {
    const double om = 1.0 - xh * xh;
    const double h = om * om;
    const double g = xh * h;
    const double gp = om * (1.0 - 5.0 * xh * xh);
    const double hp = -4.0 * xh * om;
    const double p = std::sin(wavenumber * yh);
    const double pp = wavenumber * std::cos(wavenumber * yh);
    const double q = 1.0 + yh;
    const double exx = amp_x * gp * p;
    const double eyy = aspect * amp_y * h;
    const double exy = 0.5 * (aspect * amp_x * g * pp + amp_y * hp * q - 6.0 * amp_w * g);
    const double l2 = lambda + 2.0 * mu;
    return {amp_x * g * p, amp_y * h * q + amp_w * (h * om - 1.0), l2 * exx + lambda * eyy, lambda * exx + l2 * eyy,
            2.0 * mu * exy};
}

std::array<double, 2> ManufacturedSolution::body_force(double xh, double yh) const {
    const double om = 1.0 - xh * xh;
    const double g = xh * om * om;
    const double gp = om * (1.0 - 5.0 * xh * xh);
    const double gpp = -12.0 * xh + 20.0 * xh * xh * xh;
    const double hp = -4.0 * xh * om;
    const double hpp = -4.0 + 12.0 * xh * xh;
    const double k = wavenumber;
    const double p = std::sin(k * yh);
    const double pp = k * std::cos(k * yh);
    const double ppp = -k * k * p;
    const double q = 1.0 + yh;
    const double r = aspect;
    const double A = amp_x, B = amp_y;
    const double l2 = lambda + 2.0 * mu;
    // d/dxh sxx + r d/dyh sxy + bx = 0,  d/dxh sxy + r d/dyh syy + by = 0
    const double dsxx_dx = l2 * A * gpp * p + lambda * r * B * hp;
    const double wpp = 6.0 * om * (5.0 * xh * xh - 1.0);
    const double dsxy_dy = mu * (r * A * g * ppp + B * hp);
    const double dsxy_dx = mu * (r * A * gp * pp + B * hpp * q + amp_w * wpp);
    const double dsyy_dy = lambda * A * gp * pp;
    return {-(dsxx_dx + r * dsxy_dy), -(dsxy_dx + r * dsyy_dy)};
}

std::array<double, 2> ManufacturedSolution::traction(spatial::Edge edge, double xh) const {
    const double yh = edge == spatial::Edge::top ? 1.0 : -1.0;
    const auto f = evaluate(xh, yh);
    return {yh * f[4], yh * f[3]};
}

ManufacturedSolution manufactured_solution(const spatial::Geometry& geometry,
                                           const spatial::Material& material) {
    ManufacturedSolution m;
    m.aspect = geometry.aspect();
    m.lambda = material.lambda() / material.youngs_modulus;
    m.mu = material.mu() / material.youngs_modulus;
    return m;
}

} // namespace pinn::oracle

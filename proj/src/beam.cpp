#include "pinn/beam.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pinn::spatial {

void Geometry::validate() const {
    if (!(length > 0.0 && height > 0.0 && thickness > 0.0)) {
        throw std::invalid_argument("geometry: length, height and thickness must be > 0");
    }
}

PlaneAssumption parse_plane_assumption(const std::string& s) {
    if (s == "plane_stress") return PlaneAssumption::plane_stress;
    if (s == "plane_strain") return PlaneAssumption::plane_strain;
    throw std::invalid_argument("unknown plane assumption '" + s + "'");
}

const char* plane_assumption_name(PlaneAssumption p) noexcept {
    return p == PlaneAssumption::plane_stress ? "plane_stress" : "plane_strain";
}

double Material::mu() const noexcept { return youngs_modulus / (2.0 * (1.0 + poisson_ratio)); }

double Material::lambda() const noexcept {
    const double nu = poisson_ratio;
    const double lam = youngs_modulus * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    if (assumption == PlaneAssumption::plane_strain) return lam;
    const double m = mu();
    return 2.0 * lam * m / (lam + 2.0 * m);
}

void Material::validate() const {
    if (!(youngs_modulus > 0.0)) throw std::invalid_argument("material: E must be > 0");
    if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5)) {
        throw std::invalid_argument("material: Poisson ratio must lie in [0, 0.5)");
    }
}

double FourPointLayout::moment(double x) const noexcept {
    const double ax = std::abs(x);
    if (ax >= support_x) return 0.0;
    return 0.5 * total_load * (support_x - std::max(ax, load_x));
}

void FourPointLayout::validate(const Geometry& g) const {
    const double half = 0.5 * g.length;
    if (!(total_load >= 0.0)) throw std::invalid_argument("layout: total load must be >= 0");
    if (!(patch_width > 0.0)) throw std::invalid_argument("layout: patch width must be > 0");
    if (!(0.0 < load_x && load_x < support_x)) {
        throw std::invalid_argument("layout: need 0 < load_x < support_x");
    }
    if (support_x + 0.5 * patch_width > half || load_x - 0.5 * patch_width < 0.0) {
        throw std::invalid_argument("layout: patches must lie on the beam, clear of the center");
    }
}

std::vector<TractionBC> four_point_tractions(const Geometry& g, const FourPointLayout& layout) {
    layout.validate(g);
    const double pressure = 0.5 * layout.total_load / (layout.patch_width * g.thickness);
    const double w = 0.5 * layout.patch_width;
    std::vector<TractionBC> bcs;
    for (double s : {-1.0, 1.0}) {
        bcs.push_back({Edge::top, s * layout.load_x - w, s * layout.load_x + w, 0.0, -pressure});
    }
    for (double s : {-1.0, 1.0}) {
        bcs.push_back({Edge::bottom, s * layout.support_x - w, s * layout.support_x + w, 0.0, pressure});
    }
    return bcs;
}

double net_vertical_force(const Geometry& g, const std::vector<TractionBC>& bcs) {
    double f = 0.0;
    for (const auto& bc : bcs) f += bc.ty * (bc.x_end - bc.x_begin) * g.thickness;
    return f;
}

} // namespace pinn::spatial

#pragma once

/// \file beam.hpp
///
/// Beam geometry, isotropic material and the four-point bending layout shared
/// by the spatial model, the synthetic data generator and the analytic
/// references. Coordinates have their origin at the beam center, x along the
/// axis and y upward.

#include <string>
#include <vector>

namespace pinn::spatial {

struct Geometry {
    // Default test-beam dimensions.
    double length = 3.0;    ///< l [m]
    double height = 0.3;    ///< h [m]
    double thickness = 0.2; ///< b [m], out of plane

    double second_moment() const noexcept { return thickness * height * height * height / 12.0; }
    double aspect() const noexcept { return length / height; }
    void validate() const;
};

enum class PlaneAssumption { plane_stress, plane_strain };

PlaneAssumption parse_plane_assumption(const std::string& s);
const char* plane_assumption_name(PlaneAssumption p) noexcept;

struct Material {
    double youngs_modulus = 29e9; ///< E [Pa], concrete
    double poisson_ratio = 0.2;   ///< typical for concrete
    PlaneAssumption assumption = PlaneAssumption::plane_stress;

    double mu() const noexcept;
    /// Effective in-plane lambda (the plane-stress reduction is applied).
    double lambda() const noexcept;
    void validate() const;
};

/// Symmetric four-point bending: two loads on top at +-load_x, two supports
/// at the bottom at +-support_x, each acting over a patch of patch_width.
struct FourPointLayout {
    double total_load = 10e3;  ///< [N], split equally between the two loads
    double load_x = 0.5;
    double support_x = 1.4;
    double patch_width = 0.1;

    /// Bending moment from point loads at the patch centers, sagging positive.
    double moment(double x) const noexcept;
    void validate(const Geometry& g) const;
};

enum class Edge { top, bottom };

/// Uniform traction (sigma . n) over an x-interval of the top or bottom edge.
struct TractionBC {
    Edge edge;
    double x_begin; ///< [m]
    double x_end;   ///< [m]
    double tx;      ///< [Pa]
    double ty;      ///< [Pa]
};

/// Patch tractions of the relaxed model: loads pressing down on the top,
/// supports pushing up on the bottom.
std::vector<TractionBC> four_point_tractions(const Geometry& g, const FourPointLayout& layout);

/// Sum of ty x patch area [N]; zero for a balanced set.
double net_vertical_force(const Geometry& g, const std::vector<TractionBC>& bcs);

} // namespace pinn::spatial

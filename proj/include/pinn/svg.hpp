#pragma once

/// \file svg.hpp
///
/// Minimal line-plot writer producing standalone SVG text.

#include <string>
#include <vector>

namespace pinn::svg {

struct Series {
    std::string label;
    std::vector<double> x, y;
    std::string color = "#1f77b4";
    bool markers = false; ///< dots instead of a polyline
    bool dashed = false;
};

struct VerticalLine {
    double x;
    std::string label;
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    std::vector<VerticalLine> markers;
    int width = 800;
    int height = 450;

    /// Output depends only on the contents, never on time or locale.
    std::string render() const;
};

/// Distinct colors cycled by index.
const std::string& palette(std::size_t i);

/// Round tick positions covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

} // namespace pinn::svg

#pragma once

#include <cstddef>
#include <vector>

namespace aerocell {

// Rectangular scalar field sampled at cell centers, row-major (y-major:
// index = iy * nx + ix). Cell (ix, iy) center is at
// (origin_x_m + ix * spacing_m, origin_y_m + iy * spacing_m).
struct ScalarGrid {
    double origin_x_m = 0.0;
    double origin_y_m = 0.0;
    double spacing_m = 1.0;
    int nx = 0;
    int ny = 0;
    std::vector<double> values;

    double cell_x(int ix) const { return origin_x_m + ix * spacing_m; }
    double cell_y(int iy) const { return origin_y_m + iy * spacing_m; }

    double at(int ix, int iy) const {
        return values[static_cast<std::size_t>(iy) * nx + ix];
    }
    double& at(int ix, int iy) {
        return values[static_cast<std::size_t>(iy) * nx + ix];
    }

    bool empty() const { return nx <= 0 || ny <= 0 || values.empty(); }
};

}  // namespace aerocell

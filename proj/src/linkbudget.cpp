#include "aerocell/linkbudget.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace aerocell::linkbudget {

void LinkBudgetParams::validate() const {
    if (!(carrier_freq_hz > 0.0)) throw std::domain_error("carrier_freq_hz must be > 0");
    if (!(bandwidth_hz > 0.0)) throw std::domain_error("bandwidth_hz must be > 0");
    if (!(temperature_k > 0.0)) throw std::domain_error("temperature_k must be > 0");
    if (!(fading_margin_db >= 0.0)) throw std::domain_error("fading_margin_db must be >= 0");
    if (!(ue_noise_figure_db >= 0.0)) throw std::domain_error("ue_noise_figure_db must be >= 0");
    if (!std::isfinite(tx_power_dbm)) throw std::domain_error("tx_power_dbm must be finite");
    if (!std::isfinite(tx_antenna_gain_dbi)) throw std::domain_error("tx_antenna_gain_dbi must be finite");
    if (!std::isfinite(ue_antenna_gain_dbi)) throw std::domain_error("ue_antenna_gain_dbi must be finite");
}

void AerialPlatform::validate() const {
    if (!(altitude_m > 0.0)) throw std::domain_error("altitude_m must be > 0");
    if (!std::isfinite(ground_x_m) || !std::isfinite(ground_y_m))
        throw std::domain_error("platform ground position must be finite");
}

std::optional<std::string> AerialPlatform::altitude_warning() const {
    if (altitude_m < 300.0 || altitude_m > 4000.0) {
        return "altitude " + std::to_string(altitude_m) +
               " m is outside the recommended operating band [300, 4000] m";
    }
    return std::nullopt;
}

double free_space_path_loss_db(double distance_m, double freq_hz) {
    if (!(distance_m > 0.0)) throw std::domain_error("distance_m must be > 0");
    if (!(freq_hz > 0.0)) throw std::domain_error("freq_hz must be > 0");
    return 20.0 * std::log10(distance_m) + 20.0 * std::log10(freq_hz) +
           20.0 * std::log10(4.0 * std::numbers::pi / kSpeedOfLight);
}

double thermal_noise_dbm(double bandwidth_hz, double temperature_k) {
    if (!(bandwidth_hz > 0.0)) throw std::domain_error("bandwidth_hz must be > 0");
    if (!(temperature_k > 0.0)) throw std::domain_error("temperature_k must be > 0");
    // +30 converts dBW to dBm.
    return 10.0 * std::log10(kBoltzmann * temperature_k * bandwidth_hz) + 30.0;
}

double received_power_dbm(const LinkBudgetParams& params, double slant_distance_m) {
    params.validate();
    return params.tx_power_dbm + params.tx_antenna_gain_dbi -
           free_space_path_loss_db(slant_distance_m, params.carrier_freq_hz) +
           params.ue_antenna_gain_dbi - params.fading_margin_db;
}

double snr_db(const LinkBudgetParams& params, double slant_distance_m) {
    return received_power_dbm(params, slant_distance_m) -
           thermal_noise_dbm(params.bandwidth_hz, params.temperature_k) -
           params.ue_noise_figure_db;
}

SnrGrid snr_grid(const AerialPlatform& platform, const LinkBudgetParams& params,
                 double half_extent_m, double spacing_m,
                 std::size_t max_cells, int n_threads) {
    platform.validate();
    params.validate();
    if (!(half_extent_m > 0.0)) throw std::domain_error("half_extent_m must be > 0");
    if (!(spacing_m > 0.0)) throw std::domain_error("spacing_m must be > 0");

    // Odd cell count so the center cell lands exactly on the nadir.
    const long long half_n = std::llround(half_extent_m / spacing_m);
    const long long n = 2 * half_n + 1;
    if (static_cast<std::size_t>(n) * static_cast<std::size_t>(n) > max_cells)
        throw std::length_error("snr grid exceeds the cell-count cap");

    SnrGrid grid;
    grid.nx = static_cast<int>(n);
    grid.ny = static_cast<int>(n);
    grid.spacing_m = spacing_m;
    grid.origin_x_m = platform.ground_x_m - half_n * spacing_m;
    grid.origin_y_m = platform.ground_y_m - half_n * spacing_m;
    grid.values.resize(static_cast<std::size_t>(n) * n);

    const double h2 = platform.altitude_m * platform.altitude_m;
    auto eval_rows = [&](int y0, int y1) {
        for (int iy = y0; iy < y1; ++iy) {
            const double dy = (iy - half_n) * spacing_m;
            for (int ix = 0; ix < grid.nx; ++ix) {
                const double dx = (ix - half_n) * spacing_m;
                const double d = std::sqrt(h2 + dx * dx + dy * dy);
                grid.at(ix, iy) = snr_db(params, d);
            }
        }
    };

    if (n_threads <= 1 || grid.ny < 2 * n_threads) {
        eval_rows(0, grid.ny);
    } else {
        std::vector<std::thread> workers;
        const int rows_per = (grid.ny + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const int y0 = t * rows_per;
            const int y1 = std::min(grid.ny, y0 + rows_per);
            if (y0 >= y1) break;
            workers.emplace_back(eval_rows, y0, y1);
        }
        for (auto& w : workers) w.join();
    }
    return grid;
}

std::optional<double> contour_radius_m(const AerialPlatform& platform,
                                       const LinkBudgetParams& params,
                                       double target_snr_db) {
    platform.validate();
    params.validate();
    if (!std::isfinite(target_snr_db)) throw std::domain_error("target_snr_db must be finite");

    // SNR(d) = C - FSPL(d); solve FSPL for the slant distance.
    const double c_sum = params.tx_power_dbm + params.tx_antenna_gain_dbi +
                         params.ue_antenna_gain_dbi - params.fading_margin_db -
                         params.ue_noise_figure_db -
                         thermal_noise_dbm(params.bandwidth_hz, params.temperature_k);
    const double fspl_target = c_sum - target_snr_db;
    const double freq_term = 20.0 * std::log10(params.carrier_freq_hz) +
                             20.0 * std::log10(4.0 * std::numbers::pi / kSpeedOfLight);
    const double d = std::pow(10.0, (fspl_target - freq_term) / 20.0);
    const double h = platform.altitude_m;
    if (d < h) return std::nullopt;
    return std::sqrt(d * d - h * h);
}

namespace {

// Grid-point edge identity for marching squares: the edge starting at vertex
// (ix, iy) and running toward +x (horizontal) or +y (vertical).
struct EdgeKey {
    int ix;
    int iy;
    bool vertical;
    bool operator==(const EdgeKey&) const = default;
};

struct EdgeKeyHash {
    std::size_t operator()(const EdgeKey& k) const {
        const std::uint64_t packed = (static_cast<std::uint64_t>(k.vertical) << 62) |
                                     (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.iy)) << 31) |
                                     static_cast<std::uint32_t>(k.ix);
        return std::hash<std::uint64_t>{}(packed);
    }
};

struct Segment {
    EdgeKey a;
    EdgeKey b;
};

std::array<double, 2> crossing_point(const SnrGrid& g, const EdgeKey& e, double level) {
    const double va = g.at(e.ix, e.iy);
    const int bx = e.vertical ? e.ix : e.ix + 1;
    const int by = e.vertical ? e.iy + 1 : e.iy;
    const double vb = g.at(bx, by);
    const double t = (level - va) / (vb - va);
    const double ax = g.cell_x(e.ix), ay = g.cell_y(e.iy);
    return {ax + t * (g.cell_x(bx) - ax), ay + t * (g.cell_y(by) - ay)};
}

}  // namespace

std::vector<std::vector<Polyline>> extract_isolines(const SnrGrid& grid,
                                                    const std::vector<double>& levels) {
    if (grid.empty()) throw std::domain_error("isoline extraction needs a non-empty grid");
    if (grid.values.size() != static_cast<std::size_t>(grid.nx) * grid.ny)
        throw std::domain_error("grid value count does not match nx*ny");
    for (double v : grid.values)
        if (!std::isfinite(v)) throw std::domain_error("grid values must be finite");
    for (double l : levels)
        if (!std::isfinite(l)) throw std::domain_error("isoline levels must be finite");

    std::vector<std::vector<Polyline>> out(levels.size());

    for (std::size_t li = 0; li < levels.size(); ++li) {
        const double level = levels[li];
        auto inside = [&](int ix, int iy) { return grid.at(ix, iy) >= level; };

        std::vector<Segment> segments;
        for (int iy = 0; iy + 1 < grid.ny; ++iy) {
            for (int ix = 0; ix + 1 < grid.nx; ++ix) {
                const bool bl = inside(ix, iy), br = inside(ix + 1, iy);
                const bool tr = inside(ix + 1, iy + 1), tl = inside(ix, iy + 1);
                const int code = (bl ? 1 : 0) | (br ? 2 : 0) | (tr ? 4 : 0) | (tl ? 8 : 0);
                if (code == 0 || code == 15) continue;

                const EdgeKey bottom{ix, iy, false};
                const EdgeKey top{ix, iy + 1, false};
                const EdgeKey left{ix, iy, true};
                const EdgeKey right{ix + 1, iy, true};

                switch (code) {
                    case 1: case 14: segments.push_back({left, bottom}); break;
                    case 2: case 13: segments.push_back({bottom, right}); break;
                    case 3: case 12: segments.push_back({left, right}); break;
                    case 4: case 11: segments.push_back({right, top}); break;
                    case 6: case 9:  segments.push_back({bottom, top}); break;
                    case 7: case 8:  segments.push_back({left, top}); break;
                    case 5: case 10: {
                        // Saddle: classify the cell center by the corner average.
                        const double avg = (grid.at(ix, iy) + grid.at(ix + 1, iy) +
                                            grid.at(ix + 1, iy + 1) + grid.at(ix, iy + 1)) / 4.0;
                        const bool center_inside = avg >= level;
                        const bool diag_inside = (code == 5);  // BL/TR are the inside corners
                        if (center_inside == diag_inside) {
                            segments.push_back({bottom, right});
                            segments.push_back({top, left});
                        } else {
                            segments.push_back({left, bottom});
                            segments.push_back({right, top});
                        }
                        break;
                    }
                    default: break;
                }
            }
        }

        // Chain segments into polylines; crossing points on shared edges are
        // computed once per edge, so adjacent cells match exactly.
        std::unordered_map<EdgeKey, std::vector<std::size_t>, EdgeKeyHash> by_edge;
        for (std::size_t si = 0; si < segments.size(); ++si) {
            by_edge[segments[si].a].push_back(si);
            by_edge[segments[si].b].push_back(si);
        }

        std::vector<bool> used(segments.size(), false);
        auto walk = [&](std::size_t start_seg, EdgeKey start_edge) {
            Polyline poly;
            EdgeKey cur = start_edge;
            std::size_t seg = start_seg;
            poly.points.push_back(crossing_point(grid, cur, level));
            while (true) {
                used[seg] = true;
                const EdgeKey next = (segments[seg].a == cur) ? segments[seg].b : segments[seg].a;
                poly.points.push_back(crossing_point(grid, next, level));
                cur = next;
                std::size_t next_seg = segments.size();
                for (std::size_t cand : by_edge[cur]) {
                    if (!used[cand]) { next_seg = cand; break; }
                }
                if (next_seg == segments.size()) break;
                seg = next_seg;
            }
            if (poly.points.size() > 2 && cur == start_edge) {
                poly.closed = true;  // first vertex already repeated by the walk
            }
            return poly;
        };

        std::vector<Polyline> polylines;
        // Open chains first (edges touched by exactly one segment), then cycles.
        for (std::size_t si = 0; si < segments.size(); ++si) {
            if (used[si]) continue;
            if (by_edge[segments[si].a].size() == 1)
                polylines.push_back(walk(si, segments[si].a));
            else if (by_edge[segments[si].b].size() == 1)
                polylines.push_back(walk(si, segments[si].b));
        }
        for (std::size_t si = 0; si < segments.size(); ++si) {
            if (!used[si]) polylines.push_back(walk(si, segments[si].a));
        }
        out[li] = std::move(polylines);
    }
    return out;
}

std::string grid_to_csv(const SnrGrid& grid, const std::string& value_column) {
    std::string out = "x_m,y_m," + value_column + "\n";
    char line[96];
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f\n",
                          grid.cell_x(ix), grid.cell_y(iy), grid.at(ix, iy));
            out += line;
        }
    }
    return out;
}

std::string isolines_to_csv(const std::vector<std::vector<Polyline>>& per_level,
                            const std::vector<double>& levels) {
    std::string out;
    char line[96];
    for (std::size_t li = 0; li < per_level.size() && li < levels.size(); ++li) {
        for (const Polyline& poly : per_level[li]) {
            std::snprintf(line, sizeof line, "level_db=%.6f\n", levels[li]);
            out += line;
            for (const auto& p : poly.points) {
                std::snprintf(line, sizeof line, "%.6f,%.6f\n", p[0], p[1]);
                out += line;
            }
        }
    }
    return out;
}

}  // namespace aerocell::linkbudget

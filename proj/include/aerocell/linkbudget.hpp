#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "aerocell/grid.hpp"

namespace aerocell::linkbudget {

// Boltzmann constant, J/K.
inline constexpr double kBoltzmann = 1.380649e-23;
// Speed of light used throughout the RF arithmetic, m/s.
inline constexpr double kSpeedOfLight = 2.998e8;

// Downlink link-budget inputs. Defaults are the tool's stock LTE-700-class
// parameter set; every output header echoes the effective values.
struct LinkBudgetParams {
    double carrier_freq_hz = 795.5e6;
    double bandwidth_hz = 10e6;
    double tx_power_dbm = 30.0;
    double tx_antenna_gain_dbi = 3.0;
    double ue_antenna_gain_dbi = 0.0;
    double ue_noise_figure_db = 7.0;
    double fading_margin_db = 4.0;
    double temperature_k = 293.15;

    // Throws std::domain_error on an invalid field.
    void validate() const;
};

struct AerialPlatform {
    double ground_x_m = 0.0;
    double ground_y_m = 0.0;
    double altitude_m = 300.0;

    void validate() const;
    // Non-empty when the altitude is outside the recommended operating
    // band [300, 4000] m. Accepted anyway; callers decide how to surface it.
    std::optional<std::string> altitude_warning() const;
};

using SnrGrid = ScalarGrid;

struct Polyline {
    std::vector<std::array<double, 2>> points;
    bool closed = false;
};

// Free-space path loss in dB: 20 log10(d) + 20 log10(f) + 20 log10(4 pi / c).
double free_space_path_loss_db(double distance_m, double freq_hz);

// Thermal noise floor in dBm for bandwidth_hz at temperature_k:
// 10 log10(kB * T * BW) + 30.
double thermal_noise_dbm(double bandwidth_hz, double temperature_k);

// Downlink power at the UE: P_t + G_t - L_fs + G_ue - F, in dBm.
double received_power_dbm(const LinkBudgetParams& params, double slant_distance_m);

// Downlink SNR in dB: received power minus thermal noise minus UE noise figure.
double snr_db(const LinkBudgetParams& params, double slant_distance_m);

// Ground-level SNR field centered on the platform nadir. The grid has an odd
// cell count per axis so the center cell sits exactly at the nadir; slant
// distance per cell is sqrt(altitude^2 + r^2). Evaluation may be split across
// n_threads; the result is identical for any thread count.
SnrGrid snr_grid(const AerialPlatform& platform, const LinkBudgetParams& params,
                 double half_extent_m, double spacing_m,
                 std::size_t max_cells = 16'000'000, int n_threads = 1);

// Horizontal radius of the target-SNR isoline around the nadir, from the
// analytic inversion of the link budget. Empty when the target exceeds the
// nadir SNR (slant solution shorter than the altitude).
std::optional<double> contour_radius_m(const AerialPlatform& platform,
                                       const LinkBudgetParams& params,
                                       double target_snr_db);

// Marching-squares isolines, one polyline list per requested level.
// Linear interpolation along cell edges; saddle cells are disambiguated by
// the average of the four corner values. Closed polylines repeat their first
// vertex at the end.
std::vector<std::vector<Polyline>> extract_isolines(const SnrGrid& grid,
                                                    const std::vector<double>& levels);

// Text exports. Grid: header "x_m,y_m,snr_db", one row per cell, row-major,
// six decimals. Isolines: per-polyline blocks headed by "level_db=<v>".
std::string grid_to_csv(const SnrGrid& grid,
                        const std::string& value_column = "snr_db");
std::string isolines_to_csv(const std::vector<std::vector<Polyline>>& per_level,
                            const std::vector<double>& levels);

}  // namespace aerocell::linkbudget

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "aerocell/linkbudget.hpp"

using namespace aerocell;
using namespace aerocell::linkbudget;

// Frozen oracle values, computed independently from the free-space law with
// c = 2.998e8 and kB = 1.380649e-23 (cross-checked against scipy).
namespace {
constexpr double kFspl300 = 80.002793484242;
constexpr double kFspl1000 = 90.46036838984875;
constexpr double kNoise1Hz = -173.92826818800953;
constexpr double kNoise10MHz = -103.9282681880095;
constexpr double kPr300 = -51.002793484242005;
constexpr double kSnr300 = 45.92547470376749;
constexpr double kContourRadius20dB = 5927.060902670933;

LinkBudgetParams default_params() { return LinkBudgetParams{}; }
}  // namespace

TEST_CASE("free-space path loss matches the frozen oracle") {
    CHECK(free_space_path_loss_db(300.0, 795.5e6) == doctest::Approx(kFspl300).epsilon(1e-12));
    CHECK(free_space_path_loss_db(1000.0, 795.5e6) == doctest::Approx(kFspl1000).epsilon(1e-12));
    // Doubling the distance adds exactly 20*log10(2).
    const double six_db = 20.0 * std::log10(2.0);
    CHECK(free_space_path_loss_db(600.0, 795.5e6) - free_space_path_loss_db(300.0, 795.5e6) ==
          doctest::Approx(six_db).epsilon(1e-12));
}

TEST_CASE("free-space path loss rejects non-positive inputs") {
    CHECK_THROWS_AS(free_space_path_loss_db(0.0, 1e9), std::domain_error);
    CHECK_THROWS_AS(free_space_path_loss_db(-5.0, 1e9), std::domain_error);
    CHECK_THROWS_AS(free_space_path_loss_db(100.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(free_space_path_loss_db(100.0, -1.0), std::domain_error);
}

TEST_CASE("thermal noise matches the frozen oracle") {
    CHECK(thermal_noise_dbm(1.0, 293.15) == doctest::Approx(kNoise1Hz).epsilon(1e-12));
    CHECK(thermal_noise_dbm(10e6, 293.15) == doctest::Approx(kNoise10MHz).epsilon(1e-12));
    // Bandwidth doubling costs 10*log10(2) = 3.01 dB.
    CHECK(thermal_noise_dbm(2e6, 293.15) - thermal_noise_dbm(1e6, 293.15) ==
          doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(thermal_noise_dbm(0.0, 293.15), std::domain_error);
    CHECK_THROWS_AS(thermal_noise_dbm(1e6, 0.0), std::domain_error);
}

TEST_CASE("received power composes the dB budget") {
    const auto p = default_params();
    CHECK(received_power_dbm(p, 300.0) == doctest::Approx(kPr300).epsilon(1e-12));

    // d = c/(4 pi f) zeros the path loss, so P_r collapses to P_t.
    LinkBudgetParams bare = p;
    bare.tx_antenna_gain_dbi = 0.0;
    bare.ue_antenna_gain_dbi = 0.0;
    bare.fading_margin_db = 0.0;
    const double d0 = kSpeedOfLight / (4.0 * std::numbers::pi * bare.carrier_freq_hz);
    CHECK(received_power_dbm(bare, d0) == doctest::Approx(bare.tx_power_dbm).epsilon(1e-9));

    // +1 dB of transmit gain is +1 dB of received power.
    LinkBudgetParams up = p;
    up.tx_antenna_gain_dbi += 1.0;
    CHECK(received_power_dbm(up, 300.0) - received_power_dbm(p, 300.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("snr matches the frozen oracle and its dB identities") {
    const auto p = default_params();
    CHECK(snr_db(p, 300.0) == doctest::Approx(kSnr300).epsilon(1e-12));

    LinkBudgetParams noisier = p;
    noisier.ue_noise_figure_db += 1.0;
    CHECK(snr_db(noisier, 300.0) - snr_db(p, 300.0) == doctest::Approx(-1.0).epsilon(1e-12));

    LinkBudgetParams wide = p;
    wide.bandwidth_hz *= 4.0;
    CHECK(snr_db(wide, 300.0) - snr_db(p, 300.0) ==
          doctest::Approx(-20.0 * std::log10(2.0)).epsilon(1e-12));
}

TEST_CASE("snr equals the recomposed budget bit for bit") {
    const auto p = default_params();
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(10.0, 50e3);
    for (int i = 0; i < 200; ++i) {
        const double d = dist(rng);
        const double recomposed = received_power_dbm(p, d) -
                                  thermal_noise_dbm(p.bandwidth_hz, p.temperature_k) -
                                  p.ue_noise_figure_db;
        CHECK(snr_db(p, d) == recomposed);
    }
}

TEST_CASE("snr is strictly decreasing in slant distance") {
    const auto p = default_params();
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(1.0, 100e3);
    for (int i = 0; i < 500; ++i) {
        double a = dist(rng), b = dist(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        CHECK(snr_db(p, a) > snr_db(p, b));
    }
}

TEST_CASE("snr grid centers on the nadir and is radially symmetric") {
    const AerialPlatform platform{0.0, 0.0, 300.0};
    const auto p = default_params();
    const auto grid = snr_grid(platform, p, 2000.0, 100.0);
    REQUIRE(grid.nx == 41);
    REQUIRE(grid.ny == 41);
    const int c = grid.nx / 2;
    CHECK(grid.at(c, c) == snr_db(p, platform.altitude_m));
    CHECK(grid.at(c, c) == doctest::Approx(kSnr300).epsilon(1e-12));

    // Mirror and transpose cells sit at the same horizontal distance.
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            CHECK(grid.at(ix, iy) == grid.at(grid.nx - 1 - ix, iy));
            CHECK(grid.at(ix, iy) == grid.at(iy, ix));
        }
    }
    for (double v : grid.values) CHECK(std::isfinite(v));
}

TEST_CASE("snr grid is independent of the thread count") {
    const AerialPlatform platform{125.0, -340.0, 450.0};
    const auto p = default_params();
    const auto serial = snr_grid(platform, p, 3000.0, 75.0, 16'000'000, 1);
    const auto parallel = snr_grid(platform, p, 3000.0, 75.0, 16'000'000, 4);
    REQUIRE(serial.values.size() == parallel.values.size());
    for (std::size_t i = 0; i < serial.values.size(); ++i)
        CHECK(serial.values[i] == parallel.values[i]);
}

TEST_CASE("snr grid enforces the cell-count cap") {
    const AerialPlatform platform{0.0, 0.0, 300.0};
    CHECK_THROWS_AS(snr_grid(platform, default_params(), 10'000.0, 1.0, 1'000'000),
                    std::length_error);
}

TEST_CASE("platform altitude outside the recommended band only warns") {
    AerialPlatform low{0.0, 0.0, 100.0};
    CHECK(low.altitude_warning().has_value());
    CHECK_NOTHROW(low.validate());
    AerialPlatform nominal{0.0, 0.0, 1000.0};
    CHECK_FALSE(nominal.altitude_warning().has_value());
    AerialPlatform bad{0.0, 0.0, 0.0};
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("contour radius inverts the link budget") {
    const AerialPlatform platform{0.0, 0.0, 300.0};
    const auto p = default_params();
    const double nadir = snr_db(p, platform.altitude_m);

    // At the exact nadir SNR the slant solution is the altitude itself;
    // rounding may land a hair on either side of the boundary.
    const auto at_nadir = contour_radius_m(platform, p, nadir);
    if (at_nadir.has_value()) CHECK(*at_nadir <= 1e-2);

    CHECK_FALSE(contour_radius_m(platform, p, nadir + 1e-6).has_value());

    const auto r20 = contour_radius_m(platform, p, 20.0);
    REQUIRE(r20.has_value());
    CHECK(*r20 == doctest::Approx(kContourRadius20dB).epsilon(1e-9));
}

TEST_CASE("contour radius round-trips through snr_db within 1e-9 dB") {
    const AerialPlatform platform{0.0, 0.0, 300.0};
    const auto p = default_params();
    for (double target : {-10.0, 0.0, 5.0, 20.0, 30.0, 40.0, 45.0}) {
        const auto r = contour_radius_m(platform, p, target);
        REQUIRE(r.has_value());
        const double d = std::sqrt(platform.altitude_m * platform.altitude_m + *r * *r);
        CHECK(std::abs(snr_db(p, d) - target) <= 1e-9);
    }
}

TEST_CASE("isolines: constant grid above the level yields nothing") {
    SnrGrid grid;
    grid.nx = grid.ny = 8;
    grid.spacing_m = 10.0;
    grid.values.assign(64, 5.0);
    const auto iso = extract_isolines(grid, {7.5});
    REQUIRE(iso.size() == 1);
    CHECK(iso[0].empty());
}

TEST_CASE("isolines: level at the nadir value degenerates near the nadir cell") {
    const AerialPlatform platform{0.0, 0.0, 300.0};
    const auto p = default_params();
    const auto grid = snr_grid(platform, p, 1000.0, 50.0);
    const double nadir = snr_db(p, platform.altitude_m);
    const auto iso = extract_isolines(grid, {nadir});
    REQUIRE(iso.size() == 1);
    REQUIRE_FALSE(iso[0].empty());
    for (const auto& poly : iso[0])
        for (const auto& pt : poly.points)
            CHECK(std::hypot(pt[0], pt[1]) <= grid.spacing_m + 1e-9);
}

TEST_CASE("isolines track the analytic circle within one grid cell") {
    const AerialPlatform platform{0.0, 0.0, 300.0};
    const auto p = default_params();
    const auto grid = snr_grid(platform, p, 8000.0, 40.0);
    const auto iso = extract_isolines(grid, {20.0});
    REQUIRE(iso.size() == 1);
    REQUIRE(iso[0].size() == 1);
    const auto& poly = iso[0][0];
    CHECK(poly.closed);

    const double r_true = *contour_radius_m(platform, p, 20.0);
    double r_sum = 0.0;
    for (const auto& pt : poly.points) {
        const double r = std::hypot(pt[0], pt[1]);
        CHECK(std::abs(r - r_true) <= grid.spacing_m);
        r_sum += r;
    }
    const double r_mean = r_sum / poly.points.size();
    CHECK(std::abs(r_mean - r_true) <= grid.spacing_m);
}

TEST_CASE("isolines on a tilted plane form one open polyline") {
    SnrGrid grid;
    grid.nx = 10;
    grid.ny = 6;
    grid.spacing_m = 1.0;
    grid.values.resize(60);
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) grid.at(ix, iy) = static_cast<double>(ix);
    const auto iso = extract_isolines(grid, {4.5});
    REQUIRE(iso.size() == 1);
    REQUIRE(iso[0].size() == 1);
    const auto& poly = iso[0][0];
    CHECK_FALSE(poly.closed);
    CHECK(poly.points.size() == 6);  // one crossing per grid row
    for (const auto& pt : poly.points) CHECK(pt[0] == doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("isolines reject empty grids and non-finite levels") {
    SnrGrid empty;
    CHECK_THROWS_AS(extract_isolines(empty, {1.0}), std::domain_error);
    SnrGrid grid;
    grid.nx = grid.ny = 2;
    grid.values.assign(4, 0.0);
    CHECK_THROWS_AS(extract_isolines(grid, {std::nan("")}), std::domain_error);
}

TEST_CASE("grid csv export shape") {
    SnrGrid grid;
    grid.nx = 2;
    grid.ny = 2;
    grid.spacing_m = 1.5;
    grid.origin_x_m = -1.5;
    grid.origin_y_m = 0.0;
    grid.values = {1.0, 2.0, 3.0, 4.25};
    const std::string csv = grid_to_csv(grid);
    CHECK(csv == "x_m,y_m,snr_db\n"
                 "-1.500000,0.000000,1.000000\n"
                 "0.000000,0.000000,2.000000\n"
                 "-1.500000,1.500000,3.000000\n"
                 "0.000000,1.500000,4.250000\n");
}

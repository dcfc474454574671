#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aerocell/linkbudget.hpp"
#include "aerocell/rem.hpp"

namespace aerocell::deployment {

struct Channel {
    std::string id;
    double carrier_freq_hz = 0.0;
};

// A serving cell, airborne or terrestrial: antenna at (x, y, height) with
// its own link-budget parameter set, transmitting on one channel.
struct CellSite {
    std::string id;
    double x_m = 0.0;
    double y_m = 0.0;
    double height_m = 0.0;
    std::string channel_id;
    linkbudget::LinkBudgetParams params;
    bool airborne = false;
};

struct UserEquipment {
    std::string id;
    double x_m = 0.0;
    double y_m = 0.0;
    bool tetra_capable = false;   // capability flags only; no TETRA or
    bool sband_capable = false;   // S-band performance model
};

struct SensorNode {
    std::string id;
    double x_m = 0.0;
    double y_m = 0.0;
};

enum class BackhaulKind { TETHER, WLAN, SATELLITE };

struct BackhaulLink {
    BackhaulKind kind = BackhaulKind::TETHER;
    std::string a;
    std::string b;
    double slant_range_m = 0.0;      // SATELLITE only, per-hop one-way range
    double processing_delay_s = 0.0; // SATELLITE only
    std::optional<double> fixed_delay_s;  // TETHER/WLAN override

    void validate() const;
};

enum class DsaMode { UNDERLAY, OVERLAY };

struct DsaPolicy {
    DsaMode mode = DsaMode::OVERLAY;
    double interference_cap_dbm = -110.0;          // UNDERLAY
    std::vector<std::array<double, 2>> victims;    // ground positions, UNDERLAY
};

struct ScenarioDefaults {
    double access_delay_s = 0.001;       // UE-to-cell radio hop
    double ground_link_delay_s = 0.002;  // TETHER/WLAN backhaul hop
    double max_tx_power_dbm = 30.0;      // OVERLAY grant / UNDERLAY clip
    std::string external_node_id = "external";
};

struct Scenario {
    std::vector<CellSite> platforms;     // airborne cells
    std::vector<CellSite> ground_cells;  // terrestrial cells
    std::vector<UserEquipment> ues;
    std::vector<SensorNode> sensors;
    std::vector<Channel> channels;
    std::vector<BackhaulLink> backhaul;
    DsaPolicy dsa_policy;
    ScenarioDefaults defaults;

    std::vector<const CellSite*> all_cells() const;
    const Channel* find_channel(const std::string& id) const;
    void validate() const;  // throws std::domain_error naming the problem
};

struct AssociationRow {
    std::string ue_id;
    std::string cell_id;
    double snr_db = 0.0;
    double spectral_eff_bps_hz = 0.0;  // Shannon upper bound log2(1 + snr)
};

struct Association {
    std::vector<AssociationRow> rows;
};

struct ChannelSelection {
    std::string channel_id;
    double tx_power_cap_dbm = 0.0;
};

struct UePath {
    std::string ue_id;
    bool reachable = false;
    std::vector<std::string> hops;  // ue, serving cell, ..., external
    double delay_s = 0.0;
};

struct EvalReport {
    Association association;
    std::vector<std::pair<std::string, std::optional<ChannelSelection>>> dsa;  // per cell
    std::vector<UePath> paths;
};

// Assigns every UE to the cell with the highest downlink SNR; exact ties go
// to the lexicographically lowest cell id. May split the UE list across
// n_threads; the result is identical for any thread count.
Association best_server_association(const Scenario& scenario, int n_threads = 1);

// One-hop backhaul latency: satellite links pay 2*slant/c plus processing,
// tether/WLAN links a fixed configured delay.
double backhaul_delay_s(const BackhaulLink& link, const ScenarioDefaults& defaults);

// Dynamic spectrum access decision for a transmitter at (x, y, height).
// OVERLAY: lowest-occupancy FREE channel at the configured max power; none
// when nothing is free. UNDERLAY: least-occupied known channel with the
// power capped so the nearest victim stays at or below the interference cap.
std::optional<ChannelSelection> select_channel(const DsaPolicy& policy,
                                               const rem::OccupancyTable& table,
                                               const Scenario& scenario,
                                               double tx_x_m, double tx_y_m,
                                               double tx_height_m);

// Full evaluation: association, per-cell DSA selection against the given
// occupancy table, and per-UE control-path delay (access hop plus the
// minimum-delay backhaul path to the external node).
EvalReport evaluate_scenario(const Scenario& scenario,
                             const rem::OccupancyTable& table,
                             int n_threads = 1);

// Deterministic text report: per-cell DSA comment lines, then the UE table
// "ue_id,cell_id,snr_db,spectral_eff_bps_hz,path,delay_s,reachable".
std::string report_to_csv(const EvalReport& report);

}  // namespace aerocell::deployment

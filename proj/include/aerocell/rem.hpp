#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "aerocell/grid.hpp"
#include "aerocell/sensing.hpp"

namespace aerocell::rem {

// One spectrum observation from a distributed sensing node.
struct SensorReport {
    std::string node_id;
    double x_m = 0.0;
    double y_m = 0.0;
    std::string channel_id;
    double rssi_dbm = 0.0;
    std::optional<int> decision;  // explicit occupancy vote; derived from
                                  // rssi when absent
    double timestamp_s = 0.0;

    void validate() const;  // throws std::invalid_argument with the reason
};

enum class ChannelState { FREE, OCCUPIED, UNKNOWN };

struct ChannelOccupancy {
    ChannelState state = ChannelState::UNKNOWN;
    double probability = 0.0;  // fraction of contributing nodes voting 1
    int report_count = 0;      // contributing nodes (latest in-horizon vote each)
};

struct OccupancyTable {
    std::map<std::string, ChannelOccupancy> channels;
};

struct RemConfig {
    double horizon_s = 60.0;             // staleness horizon for votes
    double energy_threshold_dbm = -90.0; // vote = 1 iff rssi >= threshold,
                                         // when no explicit vote was reported
};

// Report store with last-write-wins on (node, channel, timestamp) and lazy
// staleness handling: nothing is evicted on ingest, queries filter by
// horizon. Queries observe a consistent snapshot under interleaved ingestion.
class ReportStore {
public:
    explicit ReportStore(RemConfig config = {}) : config_(config) {}

    void ingest(const SensorReport& report);

    std::vector<SensorReport> snapshot() const;
    std::size_t size() const;
    const RemConfig& config() const { return config_; }

private:
    RemConfig config_;
    mutable std::mutex mutex_;
    std::vector<SensorReport> reports_;
    // index into reports_ keyed by (node, channel, timestamp)
    std::map<std::tuple<std::string, std::string, double>, std::size_t> index_;
};

// Fuses the latest in-horizon vote of each node per channel with the rule.
// "Now" is the newest timestamp in the store, so the table is a pure
// function of the report set. Channels listed in channel_universe but
// lacking in-horizon reports come back UNKNOWN.
OccupancyTable build_occupancy_table(const ReportStore& store,
                                     sensing::FusionRule rule,
                                     double horizon_s,
                                     const std::vector<std::string>& channel_universe = {});

// Inverse-distance-weighted (exponent 2) interpolation of the channel's
// latest per-node rssi reports over a grid. Averaging happens in the
// milliwatt domain; the result is exact at report positions.
ScalarGrid interpolate_map(const ReportStore& store, const std::string& channel_id,
                           double origin_x_m, double origin_y_m,
                           double spacing_m, int nx, int ny);

// IDW value at a single point (same model as interpolate_map).
double idw_rssi_dbm(const std::vector<SensorReport>& reports, double x_m, double y_m);

// FREE channels sorted by ascending occupancy probability, ties by
// ascending channel id.
std::vector<std::string> free_channels(const OccupancyTable& table);

// CSV with header "channel_id,state,probability,reports"; UNKNOWN channels
// leave the probability field empty.
std::string occupancy_to_csv(const OccupancyTable& table);

// Parses the report ingestion format: one report per line,
// "node_id,x_m,y_m,channel_id,rssi_dbm,decision,timestamp_s" (decision may
// be empty). '#' comments, blank lines and a leading header line are
// skipped. Malformed lines are reported with their line numbers.
struct ParsedReports {
    std::vector<SensorReport> reports;
    std::vector<std::pair<int, std::string>> errors;  // (line number, reason)
};
ParsedReports parse_report_csv(const std::string& text);

}  // namespace aerocell::rem

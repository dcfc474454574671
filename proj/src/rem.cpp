#include "aerocell/rem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace aerocell::rem {

void SensorReport::validate() const {
    if (node_id.empty()) throw std::invalid_argument("node_id must be non-empty");
    if (channel_id.empty()) throw std::invalid_argument("channel_id must be non-empty");
    if (!std::isfinite(x_m) || !std::isfinite(y_m))
        throw std::invalid_argument("report position must be finite");
    if (!std::isfinite(rssi_dbm)) throw std::invalid_argument("rssi_dbm must be finite");
    if (decision && *decision != 0 && *decision != 1)
        throw std::invalid_argument("decision must be 0 or 1");
    if (!(timestamp_s >= 0.0)) throw std::invalid_argument("timestamp_s must be >= 0");
}

void ReportStore::ingest(const SensorReport& report) {
    report.validate();
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(report.node_id, report.channel_id, report.timestamp_s);
    auto it = index_.find(key);
    if (it != index_.end()) {
        reports_[it->second] = report;  // last write wins
    } else {
        index_.emplace(key, reports_.size());
        reports_.push_back(report);
    }
}

std::vector<SensorReport> ReportStore::snapshot() const {
    std::lock_guard lock(mutex_);
    return reports_;
}

std::size_t ReportStore::size() const {
    std::lock_guard lock(mutex_);
    return reports_.size();
}

namespace {

// Latest in-horizon report per (channel, node). "Now" is the newest
// timestamp present so the selection depends only on the report set.
std::map<std::string, std::map<std::string, SensorReport>>
latest_per_channel_node(const std::vector<SensorReport>& reports,
                        std::optional<double> horizon_s) {
    double now = 0.0;
    for (const auto& r : reports) now = std::max(now, r.timestamp_s);

    std::map<std::string, std::map<std::string, SensorReport>> latest;
    for (const auto& r : reports) {
        if (horizon_s && now - r.timestamp_s > *horizon_s) continue;
        auto& per_node = latest[r.channel_id];
        auto it = per_node.find(r.node_id);
        if (it == per_node.end() || r.timestamp_s > it->second.timestamp_s)
            per_node[r.node_id] = r;
    }
    return latest;
}

int vote_of(const SensorReport& r, const RemConfig& cfg) {
    if (r.decision) return *r.decision;
    // Energy rule applied in the power domain.
    return r.rssi_dbm >= cfg.energy_threshold_dbm ? 1 : 0;
}

}  // namespace

OccupancyTable build_occupancy_table(const ReportStore& store,
                                     sensing::FusionRule rule,
                                     double horizon_s,
                                     const std::vector<std::string>& channel_universe) {
    if (!(horizon_s >= 0.0)) throw std::domain_error("horizon_s must be >= 0");
    const auto reports = store.snapshot();
    const auto latest = latest_per_channel_node(reports, horizon_s);

    OccupancyTable table;
    for (const auto& ch : channel_universe) table.channels[ch] = ChannelOccupancy{};

    for (const auto& [channel, per_node] : latest) {
        std::vector<int> votes;
        votes.reserve(per_node.size());
        for (const auto& [node, report] : per_node)
            votes.push_back(vote_of(report, store.config()));
        if (votes.empty()) continue;

        ChannelOccupancy occ;
        occ.report_count = static_cast<int>(votes.size());
        const int ones = static_cast<int>(std::count(votes.begin(), votes.end(), 1));
        occ.probability = static_cast<double>(ones) / votes.size();
        occ.state = sensing::fuse(votes, rule) == 1 ? ChannelState::OCCUPIED
                                                    : ChannelState::FREE;
        table.channels[channel] = occ;
    }
    return table;
}

double idw_rssi_dbm(const std::vector<SensorReport>& reports, double x_m, double y_m) {
    if (reports.empty()) throw std::domain_error("idw needs at least one report");
    double weight_sum = 0.0;
    double power_sum = 0.0;
    for (const auto& r : reports) {
        const double dx = x_m - r.x_m;
        const double dy = y_m - r.y_m;
        const double d2 = dx * dx + dy * dy;
        const double p_mw = std::pow(10.0, r.rssi_dbm / 10.0);
        if (d2 == 0.0) return r.rssi_dbm;  // exact at report positions
        weight_sum += 1.0 / d2;
        power_sum += p_mw / d2;
    }
    return 10.0 * std::log10(power_sum / weight_sum);
}

ScalarGrid interpolate_map(const ReportStore& store, const std::string& channel_id,
                           double origin_x_m, double origin_y_m,
                           double spacing_m, int nx, int ny) {
    if (!(spacing_m > 0.0)) throw std::domain_error("spacing_m must be > 0");
    if (nx < 1 || ny < 1) throw std::domain_error("grid must have at least one cell");

    const auto latest = latest_per_channel_node(store.snapshot(), std::nullopt);
    auto it = latest.find(channel_id);
    if (it == latest.end() || it->second.empty())
        throw std::domain_error("no reports for channel " + channel_id);

    std::vector<SensorReport> reports;
    reports.reserve(it->second.size());
    for (const auto& [node, report] : it->second) reports.push_back(report);

    ScalarGrid grid;
    grid.origin_x_m = origin_x_m;
    grid.origin_y_m = origin_y_m;
    grid.spacing_m = spacing_m;
    grid.nx = nx;
    grid.ny = ny;
    grid.values.resize(static_cast<std::size_t>(nx) * ny);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            grid.at(ix, iy) = idw_rssi_dbm(reports, grid.cell_x(ix), grid.cell_y(iy));
    return grid;
}

std::vector<std::string> free_channels(const OccupancyTable& table) {
    std::vector<std::pair<double, std::string>> free_list;
    for (const auto& [channel, occ] : table.channels)
        if (occ.state == ChannelState::FREE)
            free_list.emplace_back(occ.probability, channel);
    std::sort(free_list.begin(), free_list.end());
    std::vector<std::string> out;
    out.reserve(free_list.size());
    for (auto& [prob, channel] : free_list) out.push_back(std::move(channel));
    return out;
}

std::string occupancy_to_csv(const OccupancyTable& table) {
    std::string out = "channel_id,state,probability,reports\n";
    char buf[64];
    for (const auto& [channel, occ] : table.channels) {
        out += channel;
        switch (occ.state) {
            case ChannelState::FREE: out += ",FREE,"; break;
            case ChannelState::OCCUPIED: out += ",OCCUPIED,"; break;
            case ChannelState::UNKNOWN: out += ",UNKNOWN,"; break;
        }
        if (occ.state != ChannelState::UNKNOWN) {
            std::snprintf(buf, sizeof buf, "%.6f", occ.probability);
            out += buf;
        }
        std::snprintf(buf, sizeof buf, ",%d\n", occ.report_count);
        out += buf;
    }
    return out;
}

namespace {

bool parse_double(const std::string& tok, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(tok, &pos);
        return pos == tok.size();
    } catch (const std::exception&) {
        return false;
    }
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

ParsedReports parse_report_csv(const std::string& text) {
    ParsedReports parsed;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t == "node_id,x_m,y_m,channel_id,rssi_dbm,decision,timestamp_s") continue;

        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(t);
        while (std::getline(ls, field, ',')) fields.push_back(trim(field));
        if (t.back() == ',') fields.push_back("");
        if (fields.size() != 7) {
            parsed.errors.emplace_back(line_no, "expected 7 comma-separated fields");
            continue;
        }

        SensorReport r;
        r.node_id = fields[0];
        r.channel_id = fields[3];
        double decision_val = 0.0;
        if (!parse_double(fields[1], r.x_m) || !parse_double(fields[2], r.y_m) ||
            !parse_double(fields[4], r.rssi_dbm) ||
            !parse_double(fields[6], r.timestamp_s) ||
            (!fields[5].empty() && !parse_double(fields[5], decision_val))) {
            parsed.errors.emplace_back(line_no, "non-numeric field");
            continue;
        }
        if (!fields[5].empty()) {
            if (decision_val != 0.0 && decision_val != 1.0) {
                parsed.errors.emplace_back(line_no, "decision must be 0 or 1");
                continue;
            }
            r.decision = static_cast<int>(decision_val);
        }
        try {
            r.validate();
        } catch (const std::invalid_argument& e) {
            parsed.errors.emplace_back(line_no, e.what());
            continue;
        }
        parsed.reports.push_back(std::move(r));
    }
    return parsed;
}

}  // namespace aerocell::rem

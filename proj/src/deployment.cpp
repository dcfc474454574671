#include "aerocell/deployment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>
#include <thread>

namespace aerocell::deployment {

namespace {
constexpr double kGeoMinSlantM = 35'786e3;
}

void BackhaulLink::validate() const {
    if (a.empty() || b.empty()) throw std::domain_error("backhaul endpoints must be non-empty");
    if (kind == BackhaulKind::SATELLITE) {
        if (!(slant_range_m >= kGeoMinSlantM))
            throw std::domain_error("satellite slant_range_m must be >= 35786 km (GEO minimum)");
        if (!(processing_delay_s >= 0.0))
            throw std::domain_error("processing_delay_s must be >= 0");
    }
    if (fixed_delay_s && !(*fixed_delay_s >= 0.0))
        throw std::domain_error("fixed_delay_s must be >= 0");
}

std::vector<const CellSite*> Scenario::all_cells() const {
    std::vector<const CellSite*> cells;
    cells.reserve(platforms.size() + ground_cells.size());
    for (const auto& c : platforms) cells.push_back(&c);
    for (const auto& c : ground_cells) cells.push_back(&c);
    return cells;
}

const Channel* Scenario::find_channel(const std::string& id) const {
    for (const auto& ch : channels)
        if (ch.id == id) return &ch;
    return nullptr;
}

void Scenario::validate() const {
    std::set<std::string> ids;
    auto check_unique = [&](const std::string& id, const char* kind) {
        if (id.empty()) throw std::domain_error(std::string(kind) + " id must be non-empty");
        if (!ids.insert(id).second)
            throw std::domain_error("duplicate node id: " + id);
    };
    for (const auto& c : platforms) check_unique(c.id, "platform");
    for (const auto& c : ground_cells) check_unique(c.id, "ground_cell");
    for (const auto& u : ues) check_unique(u.id, "ue");
    for (const auto& s : sensors) check_unique(s.id, "sensor");

    std::set<std::string> channel_ids;
    for (const auto& ch : channels) {
        if (ch.id.empty()) throw std::domain_error("channel id must be non-empty");
        if (!channel_ids.insert(ch.id).second)
            throw std::domain_error("duplicate channel id: " + ch.id);
        if (!(ch.carrier_freq_hz > 0.0))
            throw std::domain_error("channel " + ch.id + " carrier_freq_hz must be > 0");
    }
    for (const CellSite* cell : all_cells()) {
        if (!find_channel(cell->channel_id))
            throw std::domain_error("cell " + cell->id + " references undefined channel " +
                                    cell->channel_id);
        if (!(cell->height_m > 0.0))
            throw std::domain_error("cell " + cell->id + " height_m must be > 0");
        cell->params.validate();
    }
    for (const auto& link : backhaul) link.validate();
}

namespace {

double cell_snr_db(const CellSite& cell, double ue_x, double ue_y) {
    const double dx = ue_x - cell.x_m;
    const double dy = ue_y - cell.y_m;
    const double d = std::sqrt(cell.height_m * cell.height_m + dx * dx + dy * dy);
    return linkbudget::snr_db(cell.params, d);
}

}  // namespace

Association best_server_association(const Scenario& scenario, int n_threads) {
    const auto cells = scenario.all_cells();
    if (cells.empty()) throw std::domain_error("association needs at least one cell");

    Association assoc;
    assoc.rows.resize(scenario.ues.size());
    auto eval_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& ue = scenario.ues[i];
            const CellSite* best = nullptr;
            double best_snr = -std::numeric_limits<double>::infinity();
            for (const CellSite* cell : cells) {
                const double snr = cell_snr_db(*cell, ue.x_m, ue.y_m);
                if (snr > best_snr || (snr == best_snr && best && cell->id < best->id)) {
                    best = cell;
                    best_snr = snr;
                }
            }
            const double snr_linear = std::pow(10.0, best_snr / 10.0);
            assoc.rows[i] = {ue.id, best->id, best_snr, std::log2(1.0 + snr_linear)};
        }
    };

    const std::size_t n = scenario.ues.size();
    if (n_threads <= 1 || n < static_cast<std::size_t>(2 * n_threads)) {
        eval_range(0, n);
    } else {
        std::vector<std::thread> workers;
        const std::size_t per = (n + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const std::size_t lo = t * per;
            const std::size_t hi = std::min(n, lo + per);
            if (lo >= hi) break;
            workers.emplace_back(eval_range, lo, hi);
        }
        for (auto& w : workers) w.join();
    }
    return assoc;
}

double backhaul_delay_s(const BackhaulLink& link, const ScenarioDefaults& defaults) {
    link.validate();
    if (link.kind == BackhaulKind::SATELLITE)
        return 2.0 * link.slant_range_m / linkbudget::kSpeedOfLight + link.processing_delay_s;
    return link.fixed_delay_s.value_or(defaults.ground_link_delay_s);
}

std::optional<ChannelSelection> select_channel(const DsaPolicy& policy,
                                               const rem::OccupancyTable& table,
                                               const Scenario& scenario,
                                               double tx_x_m, double tx_y_m,
                                               double tx_height_m) {
    if (policy.mode == DsaMode::OVERLAY) {
        const auto free = rem::free_channels(table);
        if (free.empty()) return std::nullopt;
        return ChannelSelection{free.front(), scenario.defaults.max_tx_power_dbm};
    }

    // UNDERLAY: least-occupied channel with known occupancy.
    if (policy.victims.empty())
        throw std::domain_error("underlay policy needs at least one victim position");
    std::vector<std::pair<double, std::string>> known;
    for (const auto& [channel, occ] : table.channels)
        if (occ.state != rem::ChannelState::UNKNOWN)
            known.emplace_back(occ.probability, channel);
    if (known.empty()) return std::nullopt;
    std::sort(known.begin(), known.end());
    const std::string& channel_id = known.front().second;

    const Channel* channel = scenario.find_channel(channel_id);
    if (!channel) throw std::domain_error("occupancy channel " + channel_id +
                                          " is not defined in the scenario");

    double min_fspl = std::numeric_limits<double>::infinity();
    for (const auto& victim : policy.victims) {
        const double dx = victim[0] - tx_x_m;
        const double dy = victim[1] - tx_y_m;
        const double d = std::sqrt(dx * dx + dy * dy + tx_height_m * tx_height_m);
        min_fspl = std::min(min_fspl,
                            linkbudget::free_space_path_loss_db(d, channel->carrier_freq_hz));
    }
    const double cap = std::min(policy.interference_cap_dbm + min_fspl,
                                scenario.defaults.max_tx_power_dbm);
    return ChannelSelection{channel_id, cap};
}

namespace {

// Minimum-delay path over the undirected backhaul graph. Deterministic:
// nodes are relaxed in (distance, id) order and equal-cost predecessors
// resolve to the lexicographically smallest.
struct PathResult {
    bool reachable = false;
    double delay_s = 0.0;
    std::vector<std::string> hops;
};

PathResult shortest_backhaul_path(const Scenario& scenario, const std::string& from) {
    std::map<std::string, std::vector<std::pair<std::string, double>>> adj;
    for (const auto& link : scenario.backhaul) {
        const double d = backhaul_delay_s(link, scenario.defaults);
        adj[link.a].emplace_back(link.b, d);
        adj[link.b].emplace_back(link.a, d);
    }

    const std::string& goal = scenario.defaults.external_node_id;
    std::map<std::string, double> dist;
    std::map<std::string, std::string> prev;
    using Item = std::pair<double, std::string>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[from] = 0.0;
    heap.push({0.0, from});
    while (!heap.empty()) {
        auto [d, node] = heap.top();
        heap.pop();
        if (d > dist[node]) continue;
        if (node == goal) break;
        auto it = adj.find(node);
        if (it == adj.end()) continue;
        for (const auto& [next, w] : it->second) {
            const double cand = d + w;
            auto dit = dist.find(next);
            if (dit == dist.end() || cand < dit->second ||
                (cand == dit->second && node < prev[next])) {
                dist[next] = cand;
                prev[next] = node;
                heap.push({cand, next});
            }
        }
    }

    PathResult result;
    auto dit = dist.find(goal);
    if (dit == dist.end()) return result;
    result.reachable = true;
    result.delay_s = dit->second;
    for (std::string node = goal; node != from; node = prev[node])
        result.hops.push_back(node);
    result.hops.push_back(from);
    std::reverse(result.hops.begin(), result.hops.end());
    return result;
}

}  // namespace

EvalReport evaluate_scenario(const Scenario& scenario, const rem::OccupancyTable& table,
                             int n_threads) {
    scenario.validate();
    EvalReport report;
    report.association = best_server_association(scenario, n_threads);

    for (const CellSite* cell : scenario.all_cells())
        report.dsa.emplace_back(cell->id,
                                select_channel(scenario.dsa_policy, table, scenario,
                                               cell->x_m, cell->y_m, cell->height_m));

    // Path cache per serving cell; every UE on the same cell shares it.
    std::map<std::string, PathResult> cell_paths;
    for (const auto& row : report.association.rows) {
        auto it = cell_paths.find(row.cell_id);
        if (it == cell_paths.end())
            it = cell_paths.emplace(row.cell_id,
                                    shortest_backhaul_path(scenario, row.cell_id)).first;
        const PathResult& path = it->second;

        UePath ue_path;
        ue_path.ue_id = row.ue_id;
        ue_path.reachable = path.reachable;
        ue_path.hops.push_back(row.ue_id);
        if (path.reachable) {
            ue_path.hops.insert(ue_path.hops.end(), path.hops.begin(), path.hops.end());
            ue_path.delay_s = scenario.defaults.access_delay_s + path.delay_s;
        } else {
            ue_path.hops.push_back(row.cell_id);
        }
        report.paths.push_back(std::move(ue_path));
    }
    return report;
}

std::string report_to_csv(const EvalReport& report) {
    std::string out = "# spectral_eff_bps_hz is the Shannon upper bound log2(1 + snr)\n";
    char buf[128];
    for (const auto& [cell_id, selection] : report.dsa) {
        if (selection) {
            std::snprintf(buf, sizeof buf, "# dsa cell=%s channel=%s tx_power_cap_dbm=%.6f\n",
                          cell_id.c_str(), selection->channel_id.c_str(),
                          selection->tx_power_cap_dbm);
        } else {
            std::snprintf(buf, sizeof buf, "# dsa cell=%s channel=none\n", cell_id.c_str());
        }
        out += buf;
    }

    out += "ue_id,cell_id,snr_db,spectral_eff_bps_hz,path,delay_s,reachable\n";
    for (std::size_t i = 0; i < report.association.rows.size(); ++i) {
        const auto& row = report.association.rows[i];
        const auto& path = report.paths[i];
        out += row.ue_id + "," + row.cell_id + ",";
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,", row.snr_db, row.spectral_eff_bps_hz);
        out += buf;
        for (std::size_t h = 0; h < path.hops.size(); ++h) {
            if (h > 0) out += "->";
            out += path.hops[h];
        }
        if (path.reachable) {
            std::snprintf(buf, sizeof buf, ",%.6f,1\n", path.delay_s);
        } else {
            std::snprintf(buf, sizeof buf, ",,0\n");
        }
        out += buf;
    }
    return out;
}

}  // namespace aerocell::deployment

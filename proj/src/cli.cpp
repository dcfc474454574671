#include "aerocell/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "aerocell/deployment.hpp"
#include "aerocell/linkbudget.hpp"
#include "aerocell/rem.hpp"
#include "aerocell/scenario_io.hpp"
#include "aerocell/sensing.hpp"

namespace aerocell::cli {

namespace {

using deployment::SchemaError;

// Malformed input data (reports, traces); maps to exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Per-command parameter map. Values are strings; defaults are installed by
// the command, then overridden by the config file section, then by --set.
struct ParamMap {
    std::map<std::string, std::string> values;

    void set(const std::string& key, const std::string& value) {
        if (!values.count(key)) throw SchemaError("unknown parameter: " + key);
        values[key] = value;
    }

    const std::string& str(const std::string& key) const { return values.at(key); }

    double num(const std::string& key) const {
        const std::string& v = values.at(key);
        try {
            std::size_t pos = 0;
            const double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw SchemaError("parameter " + key + " must be a number, got '" + v + "'");
        }
    }

    long long integer(const std::string& key) const {
        const double x = num(key);
        if (x != std::floor(x)) throw SchemaError("parameter " + key + " must be an integer");
        return static_cast<long long>(x);
    }

    bool flag(const std::string& key) const {
        const std::string& v = values.at(key);
        if (v == "1" || v == "true") return true;
        if (v == "0" || v == "false" || v.empty()) return false;
        throw SchemaError("parameter " + key + " must be a boolean (0/1)");
    }

    std::vector<double> num_list(const std::string& key) const {
        std::vector<double> out;
        std::istringstream in(values.at(key));
        std::string tok;
        while (std::getline(in, tok, ',')) {
            if (tok.empty()) continue;
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw SchemaError("parameter " + key + " has a non-numeric entry '" + tok + "'");
            }
        }
        return out;
    }
};

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    long long seed = 0;
    std::vector<std::string> overrides;  // key=value
};

void apply_config_file(ParamMap& params, const std::string& path, const std::string& section) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains(section)) return;
    const nlohmann::json& sec = doc[section];
    if (!sec.is_object()) throw SchemaError("config section '" + section + "' must be an object");
    for (const auto& [key, value] : sec.items()) {
        if (value.is_string())
            params.set(key, value.get<std::string>());
        else if (value.is_boolean())
            params.set(key, value.get<bool>() ? "1" : "0");
        else if (value.is_number()) {
            char buf2[48];
            std::snprintf(buf2, sizeof buf2, "%.17g", value.get<double>());
            params.set(key, buf2);
        } else {
            throw SchemaError("config key '" + section + "." + key + "' must be scalar");
        }
    }
}

void apply_overrides(ParamMap& params, const std::vector<std::string>& overrides) {
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw SchemaError("--set expects key=value, got '" + kv + "'");
        params.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
}

// Every output starts with the effective configuration so results are
// self-describing and reruns are byte-reproducible.
std::string config_echo(const std::string& command, const ParamMap& params,
                        const CommonArgs& common) {
    std::string out = "# aerocell " + command + "\n";
    out += "# out=" + common.out_path + "\n";
    out += "# seed=" + std::to_string(common.seed) + "\n";
    for (const auto& [key, value] : params.values)
        out += "# " + key + "=" + value + "\n";
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

std::string read_file_or_data_error(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open input file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string derived_path(const std::string& out, const std::string& suffix) {
    const auto dot = out.rfind('.');
    if (dot == std::string::npos || out.find('/', dot) != std::string::npos)
        return out + suffix;
    return out.substr(0, dot) + suffix + out.substr(dot);
}

linkbudget::LinkBudgetParams params_from(const ParamMap& p) {
    linkbudget::LinkBudgetParams lb;
    lb.carrier_freq_hz = p.num("carrier_freq_hz");
    lb.bandwidth_hz = p.num("bandwidth_hz");
    lb.tx_power_dbm = p.num("tx_power_dbm");
    lb.tx_antenna_gain_dbi = p.num("tx_antenna_gain_dbi");
    lb.ue_antenna_gain_dbi = p.num("ue_antenna_gain_dbi");
    lb.ue_noise_figure_db = p.num("ue_noise_figure_db");
    lb.fading_margin_db = p.num("fading_margin_db");
    lb.temperature_k = p.num("temperature_k");
    return lb;
}

int cmd_coverage(ParamMap& params, const CommonArgs& common) {
    const linkbudget::LinkBudgetParams lb = params_from(params);
    linkbudget::AerialPlatform platform{params.num("platform_x_m"), params.num("platform_y_m"),
                                        params.num("altitude_m")};
    platform.validate();
    lb.validate();
    if (auto warning = platform.altitude_warning())
        std::cerr << "warning: " << *warning << "\n";

    const long long max_cells = params.integer("max_cells");
    if (max_cells <= 0) throw SchemaError("parameter max_cells must be positive");
    const auto grid = linkbudget::snr_grid(platform, lb, params.num("half_extent_m"),
                                           params.num("spacing_m"),
                                           static_cast<std::size_t>(max_cells),
                                           static_cast<int>(params.integer("threads")));
    const std::string echo = config_echo("coverage", params, common);
    write_file(common.out_path, echo + linkbudget::grid_to_csv(grid));

    const std::vector<double> levels = params.num_list("levels");
    if (!levels.empty()) {
        const auto isolines = linkbudget::extract_isolines(grid, levels);
        std::string iso_path = params.str("iso_out");
        if (iso_path.empty()) iso_path = derived_path(common.out_path, "_isolines");
        write_file(iso_path, echo + linkbudget::isolines_to_csv(isolines, levels));
    }
    return 0;
}

int cmd_roc(ParamMap& params, const CommonArgs& common) {
    const sensing::EnergyDetector detector{static_cast<int>(params.integer("n_samples")), 1.0};
    const double snr = params.num("snr_linear");
    const auto rule = sensing::parse_rule(params.str("rule"));
    const std::vector<double> pfa_points = params.num_list("pfa");
    if (pfa_points.empty()) throw SchemaError("parameter pfa must list at least one point");
    const bool simulate = params.flag("simulate");
    const auto trials = static_cast<std::uint64_t>(params.integer("trials"));

    std::vector<double> k_list;
    for (double k : params.num_list("k_nodes")) {
        if (k < 1 || k != std::floor(k))
            throw SchemaError("parameter k_nodes must list positive integers");
        k_list.push_back(k);
    }
    if (k_list.empty()) throw SchemaError("parameter k_nodes must list at least one value");

    std::string out = config_echo("roc", params, common);
    out += simulate ? "global_pfa,global_pd,k_nodes,rule,emp_pfa,emp_pd\n"
                    : "global_pfa,global_pd,k_nodes,rule\n";
    char line[160];
    for (double kd : k_list) {
        const int k = static_cast<int>(kd);
        const auto points = sensing::roc_curve(detector, k, snr, rule, pfa_points);
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto& pt = points[i];
            if (!pt.reachable) {
                std::snprintf(line, sizeof line,
                              "# unreachable global_pfa=%.6f k_nodes=%d rule=%s\n",
                              pfa_points[i], k, sensing::rule_name(rule).c_str());
                out += line;
                continue;
            }
            if (simulate) {
                const double node_pfa = rule == sensing::FusionRule::OR
                                            ? 1.0 - std::pow(1.0 - pfa_points[i], 1.0 / k)
                                            : std::pow(pfa_points[i], 1.0 / k);
                const double mu = sensing::threshold_for_pfa(detector, node_pfa);
                const auto emp = sensing::simulate_cooperative_detection(
                    detector, k, mu, snr, rule, trials,
                    static_cast<std::uint64_t>(common.seed));
                std::snprintf(line, sizeof line, "%.6f,%.6f,%d,%s,%.6f,%.6f\n", pt.global_pfa,
                              pt.global_pd, k, sensing::rule_name(rule).c_str(),
                              emp.false_alarm, 1.0 - emp.miss);
            } else {
                std::snprintf(line, sizeof line, "%.6f,%.6f,%d,%s\n", pt.global_pfa,
                              pt.global_pd, k, sensing::rule_name(rule).c_str());
            }
            out += line;
        }
    }
    write_file(common.out_path, out);
    return 0;
}

int cmd_fuse(ParamMap& params, const CommonArgs& common) {
    const int k = static_cast<int>(params.integer("k_nodes"));
    const double pd = params.num("p_d");
    const double pfa = params.num("p_fa");

    std::string out = config_echo("fuse", params, common);
    out += "rule,miss,false_alarm\n";
    char line[96];
    for (auto rule : {sensing::FusionRule::OR, sensing::FusionRule::AND,
                      sensing::FusionRule::BINOMIAL_SUM}) {
        const auto probs = sensing::fusion_probs_closed_form({k, pd, pfa, rule});
        std::snprintf(line, sizeof line, "%s,%.12f,%.12f\n",
                      sensing::rule_name(rule).c_str(), probs.miss, probs.false_alarm);
        out += line;
    }
    std::cout << out;
    if (!common.out_path.empty()) write_file(common.out_path, out);
    return 0;
}

void load_report_store(rem::ReportStore& store, const std::string& path) {
    const std::string text = read_file_or_data_error(path);
    const auto parsed = rem::parse_report_csv(text);
    if (!parsed.errors.empty()) {
        std::string msg = "malformed report lines in " + path + ":";
        for (const auto& [line_no, why] : parsed.errors)
            msg += "\n  line " + std::to_string(line_no) + ": " + why;
        throw DataError(msg);
    }
    if (parsed.reports.empty()) throw DataError("report file has no reports: " + path);
    for (const auto& r : parsed.reports) store.ingest(r);
}

int cmd_rem(ParamMap& params, const CommonArgs& common) {
    const std::string reports_path = params.str("reports");
    if (reports_path.empty()) throw SchemaError("parameter reports (input path) is required");

    rem::RemConfig config;
    config.horizon_s = params.num("horizon_s");
    config.energy_threshold_dbm = params.num("energy_threshold_dbm");
    const auto rule = sensing::parse_rule(params.str("rule"));
    rem::ReportStore store(config);
    load_report_store(store, reports_path);

    const auto table = rem::build_occupancy_table(store, rule, config.horizon_s);
    const std::string echo = config_echo("rem", params, common);
    write_file(common.out_path, echo + rem::occupancy_to_csv(table));

    const std::string map_channel = params.str("map_channel");
    if (!map_channel.empty()) {
        double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
        bool first = true;
        for (const auto& r : store.snapshot()) {
            if (r.channel_id != map_channel) continue;
            if (first) {
                x_min = x_max = r.x_m;
                y_min = y_max = r.y_m;
                first = false;
            } else {
                x_min = std::min(x_min, r.x_m);
                x_max = std::max(x_max, r.x_m);
                y_min = std::min(y_min, r.y_m);
                y_max = std::max(y_max, r.y_m);
            }
        }
        if (first) throw DataError("no reports for map channel " + map_channel);
        const double margin = params.num("map_margin_m");
        const double spacing = params.num("map_spacing_m");
        if (!(spacing > 0.0)) throw SchemaError("parameter map_spacing_m must be > 0");
        const int nx = std::max(1, static_cast<int>((x_max - x_min + 2 * margin) / spacing) + 1);
        const int ny = std::max(1, static_cast<int>((y_max - y_min + 2 * margin) / spacing) + 1);
        const auto map = rem::interpolate_map(store, map_channel, x_min - margin,
                                              y_min - margin, spacing, nx, ny);
        std::string map_path = params.str("map_out");
        if (map_path.empty()) map_path = derived_path(common.out_path, "_map");
        write_file(map_path, echo + linkbudget::grid_to_csv(map, "rssi_dbm"));
    }
    return 0;
}

int cmd_scenario(ParamMap& params, const CommonArgs& common) {
    const std::string scenario_path = params.str("scenario");
    if (scenario_path.empty())
        throw SchemaError("parameter scenario (input path) is required");

    const std::string text = [&] {
        std::ifstream in(scenario_path);
        if (!in) throw SchemaError("cannot open scenario file: " + scenario_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }();

    // The config format allows per-command sections next to the scenario
    // keys; strip them before schema validation.
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("scenario is not valid JSON: ") + e.what());
    }
    for (const char* section : {"coverage", "roc", "fuse", "rem", "scenario"})
        if (doc.is_object()) doc.erase(section);
    const deployment::Scenario scenario = deployment::load_scenario_json(doc.dump());

    for (const auto& cell : scenario.platforms) {
        const linkbudget::AerialPlatform platform{cell.x_m, cell.y_m, cell.height_m};
        if (auto warning = platform.altitude_warning())
            std::cerr << "warning: platform " << cell.id << ": " << *warning << "\n";
    }

    rem::OccupancyTable table;
    std::vector<std::string> universe;
    for (const auto& ch : scenario.channels) universe.push_back(ch.id);
    const std::string reports_path = params.str("reports");
    const auto rule = sensing::parse_rule(params.str("rule"));
    if (!reports_path.empty()) {
        rem::RemConfig config;
        config.horizon_s = params.num("horizon_s");
        config.energy_threshold_dbm = params.num("energy_threshold_dbm");
        rem::ReportStore store(config);
        load_report_store(store, reports_path);
        table = rem::build_occupancy_table(store, rule, config.horizon_s, universe);
    } else {
        const rem::ReportStore empty_store;
        table = rem::build_occupancy_table(empty_store, rule,
                                           params.num("horizon_s"), universe);
    }
    // DSA only considers channels the scenario defines.
    std::erase_if(table.channels, [&](const auto& entry) {
        return std::find(universe.begin(), universe.end(), entry.first) == universe.end();
    });

    const auto report = deployment::evaluate_scenario(
        scenario, table, static_cast<int>(params.integer("threads")));
    write_file(common.out_path,
               config_echo("scenario", params, common) + deployment::report_to_csv(report));
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"aerial-cell coverage, cooperative spectrum sensing and deployment toolkit"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* app = nullptr;
        CommonArgs common;
        ParamMap params;
        int (*fn)(ParamMap&, const CommonArgs&) = nullptr;
    };
    std::map<std::string, Sub> subs;

    auto add_common = [&](CLI::App* sub, Sub& entry, const std::string& default_out) {
        entry.common.out_path = default_out;
        sub->add_option("--config", entry.common.config_path, "JSON config with per-command sections");
        sub->add_option("--out", entry.common.out_path, "output file path");
        sub->add_option("--seed", entry.common.seed, "master random seed");
        sub->add_option("--set", entry.common.overrides, "override parameter, key=value");
    };

    {
        Sub& s = subs["coverage"];
        s.app = app.add_subcommand("coverage", "ground-level SNR grid and isolines for an airborne cell");
        s.fn = cmd_coverage;
        s.params.values = {
            {"carrier_freq_hz", "795500000"}, {"altitude_m", "300"},
            {"platform_x_m", "0"}, {"platform_y_m", "0"},
            {"tx_power_dbm", "30"}, {"bandwidth_hz", "10000000"},
            {"tx_antenna_gain_dbi", "3"}, {"ue_antenna_gain_dbi", "0"},
            {"ue_noise_figure_db", "7"}, {"fading_margin_db", "4"},
            {"temperature_k", "293.15"}, {"half_extent_m", "8000"},
            {"spacing_m", "40"}, {"levels", ""}, {"iso_out", ""},
            {"threads", "1"}, {"max_cells", "16000000"}};
        add_common(s.app, s, "coverage_grid.csv");
        s.app->add_option("--levels", [&s](const std::vector<std::string>& vals) {
            s.params.values["levels"] = vals.empty() ? "" : vals.front();
            return true;
        }, "comma-separated isoline levels in dB");
    }
    {
        Sub& s = subs["roc"];
        s.app = app.add_subcommand("roc", "cooperative energy-detection ROC curves");
        s.fn = cmd_roc;
        s.params.values = {
            {"k_nodes", "1,2,4,8"}, {"n_samples", "10"}, {"snr_linear", "1"},
            {"rule", "OR"}, {"pfa", "0.01,0.02,0.05,0.1,0.2,0.3,0.4,0.5"},
            {"simulate", "0"}, {"trials", "100000"}};
        add_common(s.app, s, "roc.csv");
        s.app->add_flag_callback("--simulate",
                                 [&s] { s.params.values["simulate"] = "1"; },
                                 "add Monte Carlo columns");
        s.app->add_option("--rule", [&s](const std::vector<std::string>& vals) {
            if (!vals.empty()) s.params.values["rule"] = vals.front();
            return true;
        }, "fusion rule: OR, AND or BINOMIAL_SUM");
    }
    {
        Sub& s = subs["fuse"];
        s.app = app.add_subcommand("fuse", "closed-form fused miss/false-alarm probabilities");
        s.fn = cmd_fuse;
        s.params.values = {{"k_nodes", "2"}, {"p_d", "0.9"}, {"p_fa", "0.1"}};
        add_common(s.app, s, "");
    }
    {
        Sub& s = subs["rem"];
        s.app = app.add_subcommand("rem", "occupancy table and radio map from sensor reports");
        s.fn = cmd_rem;
        s.params.values = {
            {"reports", ""}, {"rule", "OR"}, {"horizon_s", "60"},
            {"energy_threshold_dbm", "-90"}, {"map_channel", ""}, {"map_out", ""},
            {"map_spacing_m", "10"}, {"map_margin_m", "100"}};
        add_common(s.app, s, "occupancy.csv");
        s.app->add_option("--reports", [&s](const std::vector<std::string>& vals) {
            if (!vals.empty()) s.params.values["reports"] = vals.front();
            return true;
        }, "sensor report CSV path");
    }
    {
        Sub& s = subs["scenario"];
        s.app = app.add_subcommand("scenario", "evaluate a deployment scenario");
        s.fn = cmd_scenario;
        s.params.values = {
            {"scenario", ""}, {"reports", ""}, {"rule", "OR"}, {"horizon_s", "60"},
            {"energy_threshold_dbm", "-90"}, {"threads", "1"}};
        add_common(s.app, s, "scenario_report.csv");
        s.app->add_option("--scenario", [&s](const std::vector<std::string>& vals) {
            if (!vals.empty()) s.params.values["scenario"] = vals.front();
            return true;
        }, "scenario JSON path");
        s.app->add_option("--reports", [&s](const std::vector<std::string>& vals) {
            if (!vals.empty()) s.params.values["reports"] = vals.front();
            return true;
        }, "sensor report CSV path for the occupancy table");
    }

    try {
        std::vector<std::string> argv_copy(args.rbegin(), args.rend());
        app.parse(argv_copy);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    for (auto& [name, sub] : subs) {
        if (!sub.app->parsed()) continue;
        try {
            apply_config_file(sub.params, sub.common.config_path, name);
            apply_overrides(sub.params, sub.common.overrides);
            if (name == "scenario" && sub.params.values["scenario"].empty())
                sub.params.values["scenario"] = sub.common.config_path;
            return sub.fn(sub.params, sub.common);
        } catch (const SchemaError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        } catch (const std::domain_error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        } catch (const std::invalid_argument& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        } catch (const std::length_error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        } catch (const DataError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 3;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    return 2;
}

}  // namespace aerocell::cli

#include "aerocell/scenario_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace aerocell::deployment {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& why) {
    throw SchemaError("scenario key '" + key + "': " + why);
}

void check_keys(const json& obj, const std::string& context,
                const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key))
            fail(context.empty() ? key : context + "." + key, "unknown key");
    }
}

double get_num(const json& obj, const std::string& context, const std::string& key) {
    if (!obj.contains(key)) fail(context + "." + key, "missing");
    if (!obj[key].is_number()) fail(context + "." + key, "must be a number");
    return obj[key].get<double>();
}

double get_num_or(const json& obj, const std::string& context, const std::string& key,
                  double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) fail(context + "." + key, "must be a number");
    return obj[key].get<double>();
}

std::string get_str(const json& obj, const std::string& context, const std::string& key) {
    if (!obj.contains(key)) fail(context + "." + key, "missing");
    if (!obj[key].is_string()) fail(context + "." + key, "must be a string");
    return obj[key].get<std::string>();
}

bool get_bool_or(const json& obj, const std::string& context, const std::string& key,
                 bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) fail(context + "." + key, "must be a boolean");
    return obj[key].get<bool>();
}

const json& get_array(const json& obj, const std::string& key) {
    static const json empty = json::array();
    if (!obj.contains(key)) return empty;
    if (!obj[key].is_array()) fail(key, "must be an array");
    return obj[key];
}

linkbudget::LinkBudgetParams read_params(const json& obj, const std::string& context,
                                         const linkbudget::LinkBudgetParams& base) {
    linkbudget::LinkBudgetParams p = base;
    p.tx_power_dbm = get_num_or(obj, context, "tx_power_dbm", base.tx_power_dbm);
    p.bandwidth_hz = get_num_or(obj, context, "bandwidth_hz", base.bandwidth_hz);
    p.tx_antenna_gain_dbi = get_num_or(obj, context, "tx_antenna_gain_dbi", base.tx_antenna_gain_dbi);
    p.ue_antenna_gain_dbi = get_num_or(obj, context, "ue_antenna_gain_dbi", base.ue_antenna_gain_dbi);
    p.ue_noise_figure_db = get_num_or(obj, context, "ue_noise_figure_db", base.ue_noise_figure_db);
    p.fading_margin_db = get_num_or(obj, context, "fading_margin_db", base.fading_margin_db);
    p.temperature_k = get_num_or(obj, context, "temperature_k", base.temperature_k);
    return p;
}

const std::set<std::string> kCellParamKeys = {
    "tx_power_dbm", "bandwidth_hz", "tx_antenna_gain_dbi", "ue_antenna_gain_dbi",
    "ue_noise_figure_db", "fading_margin_db", "temperature_k"};

std::set<std::string> with_params(std::set<std::string> keys) {
    keys.insert(kCellParamKeys.begin(), kCellParamKeys.end());
    return keys;
}

}  // namespace

Scenario load_scenario_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("scenario root must be a JSON object");
    check_keys(doc, "", {"platforms", "ground_cells", "ues", "sensors", "channels",
                         "backhaul", "dsa_policy", "defaults"});

    Scenario sc;

    const json defaults_obj = doc.contains("defaults") ? doc["defaults"] : json::object();
    if (!defaults_obj.is_object()) fail("defaults", "must be an object");
    check_keys(defaults_obj, "defaults",
               with_params({"access_delay_s", "ground_link_delay_s", "max_tx_power_dbm",
                            "external_node_id", "carrier_freq_hz"}));
    sc.defaults.access_delay_s =
        get_num_or(defaults_obj, "defaults", "access_delay_s", sc.defaults.access_delay_s);
    sc.defaults.ground_link_delay_s =
        get_num_or(defaults_obj, "defaults", "ground_link_delay_s", sc.defaults.ground_link_delay_s);
    sc.defaults.max_tx_power_dbm =
        get_num_or(defaults_obj, "defaults", "max_tx_power_dbm", sc.defaults.max_tx_power_dbm);
    if (defaults_obj.contains("external_node_id"))
        sc.defaults.external_node_id = get_str(defaults_obj, "defaults", "external_node_id");
    linkbudget::LinkBudgetParams base_params =
        read_params(defaults_obj, "defaults", linkbudget::LinkBudgetParams{});

    for (std::size_t i = 0; i < get_array(doc, "channels").size(); ++i) {
        const json& obj = doc["channels"][i];
        const std::string ctx = "channels[" + std::to_string(i) + "]";
        if (!obj.is_object()) fail(ctx, "must be an object");
        check_keys(obj, ctx, {"id", "carrier_freq_hz"});
        sc.channels.push_back({get_str(obj, ctx, "id"), get_num(obj, ctx, "carrier_freq_hz")});
    }

    auto read_cell = [&](const json& obj, const std::string& ctx, bool airborne) {
        if (!obj.is_object()) fail(ctx, "must be an object");
        check_keys(obj, ctx,
                   with_params({"id", "x_m", "y_m", airborne ? "altitude_m" : "height_m",
                                "channel_id"}));
        CellSite cell;
        cell.id = get_str(obj, ctx, "id");
        cell.x_m = get_num(obj, ctx, "x_m");
        cell.y_m = get_num(obj, ctx, "y_m");
        cell.height_m = airborne ? get_num(obj, ctx, "altitude_m")
                                 : get_num_or(obj, ctx, "height_m", 10.0);
        cell.channel_id = get_str(obj, ctx, "channel_id");
        cell.airborne = airborne;
        cell.params = read_params(obj, ctx, base_params);
        if (const Channel* ch = sc.find_channel(cell.channel_id))
            cell.params.carrier_freq_hz = ch->carrier_freq_hz;
        return cell;
    };

    for (std::size_t i = 0; i < get_array(doc, "platforms").size(); ++i)
        sc.platforms.push_back(
            read_cell(doc["platforms"][i], "platforms[" + std::to_string(i) + "]", true));
    for (std::size_t i = 0; i < get_array(doc, "ground_cells").size(); ++i)
        sc.ground_cells.push_back(
            read_cell(doc["ground_cells"][i], "ground_cells[" + std::to_string(i) + "]", false));

    for (std::size_t i = 0; i < get_array(doc, "ues").size(); ++i) {
        const json& obj = doc["ues"][i];
        const std::string ctx = "ues[" + std::to_string(i) + "]";
        if (!obj.is_object()) fail(ctx, "must be an object");
        check_keys(obj, ctx, {"id", "x_m", "y_m", "tetra", "sband"});
        UserEquipment ue;
        ue.id = get_str(obj, ctx, "id");
        ue.x_m = get_num(obj, ctx, "x_m");
        ue.y_m = get_num(obj, ctx, "y_m");
        ue.tetra_capable = get_bool_or(obj, ctx, "tetra", false);
        ue.sband_capable = get_bool_or(obj, ctx, "sband", false);
        sc.ues.push_back(std::move(ue));
    }

    for (std::size_t i = 0; i < get_array(doc, "sensors").size(); ++i) {
        const json& obj = doc["sensors"][i];
        const std::string ctx = "sensors[" + std::to_string(i) + "]";
        if (!obj.is_object()) fail(ctx, "must be an object");
        check_keys(obj, ctx, {"id", "x_m", "y_m"});
        sc.sensors.push_back({get_str(obj, ctx, "id"), get_num(obj, ctx, "x_m"),
                              get_num(obj, ctx, "y_m")});
    }

    for (std::size_t i = 0; i < get_array(doc, "backhaul").size(); ++i) {
        const json& obj = doc["backhaul"][i];
        const std::string ctx = "backhaul[" + std::to_string(i) + "]";
        if (!obj.is_object()) fail(ctx, "must be an object");
        check_keys(obj, ctx,
                   {"kind", "a", "b", "slant_range_m", "processing_delay_s", "fixed_delay_s"});
        BackhaulLink link;
        const std::string kind = get_str(obj, ctx, "kind");
        if (kind == "TETHER") link.kind = BackhaulKind::TETHER;
        else if (kind == "WLAN") link.kind = BackhaulKind::WLAN;
        else if (kind == "SATELLITE") link.kind = BackhaulKind::SATELLITE;
        else fail(ctx + ".kind", "must be TETHER, WLAN or SATELLITE");
        link.a = get_str(obj, ctx, "a");
        link.b = get_str(obj, ctx, "b");
        link.slant_range_m = get_num_or(obj, ctx, "slant_range_m", 0.0);
        link.processing_delay_s = get_num_or(obj, ctx, "processing_delay_s", 0.0);
        if (obj.contains("fixed_delay_s"))
            link.fixed_delay_s = get_num(obj, ctx, "fixed_delay_s");
        try {
            link.validate();
        } catch (const std::domain_error& e) {
            fail(ctx, e.what());
        }
        sc.backhaul.push_back(std::move(link));
    }

    if (doc.contains("dsa_policy")) {
        const json& obj = doc["dsa_policy"];
        if (!obj.is_object()) fail("dsa_policy", "must be an object");
        check_keys(obj, "dsa_policy", {"mode", "interference_cap_dbm", "victims"});
        const std::string mode = get_str(obj, "dsa_policy", "mode");
        if (mode == "UNDERLAY") sc.dsa_policy.mode = DsaMode::UNDERLAY;
        else if (mode == "OVERLAY") sc.dsa_policy.mode = DsaMode::OVERLAY;
        else fail("dsa_policy.mode", "must be UNDERLAY or OVERLAY");
        sc.dsa_policy.interference_cap_dbm =
            get_num_or(obj, "dsa_policy", "interference_cap_dbm", sc.dsa_policy.interference_cap_dbm);
        for (std::size_t i = 0; i < get_array(obj, "victims").size(); ++i) {
            const json& v = obj["victims"][i];
            const std::string ctx = "dsa_policy.victims[" + std::to_string(i) + "]";
            if (!v.is_object()) fail(ctx, "must be an object");
            check_keys(v, ctx, {"x_m", "y_m"});
            sc.dsa_policy.victims.push_back({get_num(v, ctx, "x_m"), get_num(v, ctx, "y_m")});
        }
        if (sc.dsa_policy.mode == DsaMode::UNDERLAY && sc.dsa_policy.victims.empty())
            fail("dsa_policy.victims", "underlay mode needs at least one victim position");
    }

    try {
        sc.validate();
    } catch (const std::domain_error& e) {
        throw SchemaError(e.what());
    }
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario_json(buf.str());
}

}  // namespace aerocell::deployment

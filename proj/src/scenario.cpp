#include "esim/scenario.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace esim {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok) throw ConfigError("scenario: unknown key '" + key + "' in " + where);
    }
}

std::string resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return p;
    std::filesystem::path path(p);
    if (path.is_absolute()) return p;
    return (base / path).string();
}

Objective objective_from_name(const std::string& s) {
    if (s == "accuracy-first" || s == "accuracy") return Objective::AccuracyFirst;
    if (s == "latency-first" || s == "latency") return Objective::LatencyFirst;
    throw ConfigError("scenario: unknown objective '" + s + "'");
}

WrongLabelMode wrong_label_from_name(const std::string& s) {
    if (s == "uniform") return WrongLabelMode::UniformOverWrong;
    if (s == "shared-confusion") return WrongLabelMode::SharedConfusion;
    throw ConfigError("scenario: unknown wrong_label mode '" + s + "'");
}

}  // namespace

void LatencyModelConfig::validate() const {
    if (!(network_min_ms >= 0) || network_max_ms < network_min_ms)
        throw ConfigError("latency model: bad network delay range");
    if (!(launch_min_s >= 0) || launch_max_s < launch_min_s)
        throw ConfigError("latency model: bad launch delay range");
}

void Scenario::validate() const {
    if (zoo_csv.empty()) throw ConfigError("scenario: zoo csv path missing");
    if (catalog_csv.empty()) throw ConfigError("scenario: instance catalog path missing");
    if (difficulty_spread < 0 || difficulty_spread >= 0.5)
        throw ConfigError("scenario: difficulty_spread out of [0,0.5)");
    if (error_correlation < 0 || error_correlation >= 1)
        throw ConfigError("scenario: error_correlation out of [0,1)");
    trace.validate();
    predictor.validate();
    autoscaler.validate();
    market.validate();
    latency.validate();
    if (policy.acc_margin < 0 || policy.lat_margin_ms < 0 ||
        !(policy.sampling_interval_s > 0))
        throw ConfigError("scenario: bad selection policy settings");
}

std::map<std::string, std::string> Scenario::echo() const {
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%g", v);
        return std::string(buf);
    };
    std::map<std::string, std::string> e;
    e["name"] = name;
    e["seed"] = std::to_string(seed);
    e["zoo_csv"] = zoo_csv;
    e["catalog_csv"] = catalog_csv;
    e["policy"] = policy_name(policy.policy);
    e["uniform_voting"] = policy.uniform_voting ? "true" : "false";
    e["sampling_interval_s"] = fmt(policy.sampling_interval_s);
    e["predictor"] = predictor_name(predictor.kind);
    e["trace.kind"] = trace.kind == TraceKind::Diurnal  ? "diurnal"
                      : trace.kind == TraceKind::Bursty ? "bursty"
                                                        : "csv";
    e["trace.mean_rate"] = fmt(trace.mean_rate);
    e["trace.duration_s"] = fmt(trace.duration_s);
    e["error_correlation"] = fmt(error_correlation);
    e["wrong_label"] =
        wrong_label == WrongLabelMode::UniformOverWrong ? "uniform" : "shared-confusion";
    e["market.use_spot"] = market.use_spot ? "true" : "false";
    e["market.bid_fraction"] = fmt(market.bid_fraction);
    e["market.failure_prob"] = fmt(market.failure_prob);
    e["warm_start"] = warm_start ? "true" : "false";
    return e;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    const auto base = std::filesystem::path(path).parent_path();

    reject_unknown(j,
                   {"name", "seed", "zoo", "trace", "policy", "predictor", "autoscaler",
                    "market", "latency", "metrics", "catalog", "warm_start"},
                   "top level");

    Scenario s;
    s.name = j.value("name", std::filesystem::path(path).stem().string());
    s.seed = j.value("seed", 1ull);
    s.warm_start = j.value("warm_start", true);

    if (!j.contains("zoo")) throw ConfigError("scenario: missing 'zoo' section");
    {
        const json& z = j["zoo"];
        reject_unknown(z,
                       {"csv", "class_matrix_csv", "difficulty_spread", "wrong_label",
                        "error_correlation"},
                       "zoo");
        s.zoo_csv = resolve(base, z.value("csv", ""));
        s.class_matrix_csv = resolve(base, z.value("class_matrix_csv", ""));
        s.difficulty_spread = z.value("difficulty_spread", 0.0);
        s.wrong_label = wrong_label_from_name(z.value("wrong_label", "uniform"));
        s.error_correlation = z.value("error_correlation", 0.0);
    }
    if (!j.contains("catalog")) throw ConfigError("scenario: missing 'catalog' section");
    {
        const json& c = j["catalog"];
        reject_unknown(c, {"csv"}, "catalog");
        s.catalog_csv = resolve(base, c.value("csv", ""));
    }
    if (!j.contains("trace")) throw ConfigError("scenario: missing 'trace' section");
    {
        const json& t = j["trace"];
        reject_unknown(t,
                       {"kind", "mean_rate", "duration_s", "amplitude", "period_s",
                        "burst_multiplier", "burst_duration_s", "burst_interarrival_s",
                        "num_classes", "class_popularity", "constraint_mix", "csv_path"},
                       "trace");
        std::string kind = t.value("kind", "diurnal");
        if (kind == "diurnal")
            s.trace.kind = TraceKind::Diurnal;
        else if (kind == "bursty")
            s.trace.kind = TraceKind::Bursty;
        else if (kind == "csv")
            s.trace.kind = TraceKind::Csv;
        else
            throw ConfigError("scenario: unknown trace kind '" + kind + "'");
        s.trace.mean_rate = t.value("mean_rate", s.trace.mean_rate);
        s.trace.duration_s = t.value("duration_s", s.trace.duration_s);
        s.trace.amplitude = t.value("amplitude", s.trace.amplitude);
        s.trace.period_s = t.value("period_s", s.trace.period_s);
        s.trace.burst_multiplier = t.value("burst_multiplier", s.trace.burst_multiplier);
        s.trace.burst_duration_s = t.value("burst_duration_s", s.trace.burst_duration_s);
        s.trace.burst_interarrival_s =
            t.value("burst_interarrival_s", s.trace.burst_interarrival_s);
        s.trace.num_classes = t.value("num_classes", s.trace.num_classes);
        if (t.contains("class_popularity"))
            s.trace.class_popularity = t["class_popularity"].get<std::vector<double>>();
        s.trace.csv_path = resolve(base, t.value("csv_path", ""));
        s.trace.seed = s.seed;
        if (s.trace.kind != TraceKind::Csv) {
            if (!t.contains("constraint_mix"))
                throw ConfigError("scenario: trace needs a constraint_mix");
            for (const json& e : t["constraint_mix"]) {
                reject_unknown(e, {"latency_ms", "accuracy", "objective", "probability"},
                               "constraint_mix entry");
                ConstraintMixEntry entry;
                entry.constraint.latency_target_ms = e.value("latency_ms", 0.0);
                entry.constraint.accuracy_target = e.value("accuracy", 0.0);
                entry.constraint.primary_objective =
                    objective_from_name(e.value("objective", "accuracy-first"));
                entry.probability = e.value("probability", 0.0);
                s.trace.constraint_mix.push_back(entry);
            }
        }
    }
    if (j.contains("policy")) {
        const json& p = j["policy"];
        reject_unknown(
            p, {"kind", "acc_margin", "lat_margin_ms", "sampling_interval_s", "uniform_voting"},
            "policy");
        s.policy.policy = policy_from_name(p.value("kind", "cocktail-dynamic"));
        s.policy.acc_margin = p.value("acc_margin", s.policy.acc_margin);
        s.policy.lat_margin_ms = p.value("lat_margin_ms", s.policy.lat_margin_ms);
        s.policy.sampling_interval_s =
            p.value("sampling_interval_s", s.policy.sampling_interval_s);
        // The full-ensemble baseline combines votes without class weights
        // unless the scenario explicitly overrides it.
        s.policy.uniform_voting =
            p.value("uniform_voting", s.policy.policy == SelectionPolicy::FullStatic);
    }
    if (j.contains("predictor")) {
        const json& p = j["predictor"];
        reject_unknown(p,
                       {"kind", "window_s", "history_s", "horizon_s", "smoothing",
                        "season_period_s", "prediction_file"},
                       "predictor");
        s.predictor.kind = predictor_from_name(p.value("kind", "moving-window-average"));
        s.predictor.window_s = p.value("window_s", s.predictor.window_s);
        s.predictor.history_s = p.value("history_s", s.predictor.history_s);
        s.predictor.horizon_s = p.value("horizon_s", s.predictor.horizon_s);
        s.predictor.smoothing = p.value("smoothing", s.predictor.smoothing);
        s.predictor.season_period_s = p.value("season_period_s", s.predictor.season_period_s);
        s.predictor.prediction_file = resolve(base, p.value("prediction_file", ""));
    }
    if (j.contains("autoscaler")) {
        const json& a = j["autoscaler"];
        reject_unknown(a,
                       {"scheduling_interval_s", "reactive_interval_s", "idle_timeout_s",
                        "utilization_trigger", "slo_violation_trigger", "importance_window_s",
                        "uniform_weights"},
                       "autoscaler");
        s.autoscaler.scheduling_interval_s =
            a.value("scheduling_interval_s", s.autoscaler.scheduling_interval_s);
        s.autoscaler.reactive_interval_s =
            a.value("reactive_interval_s", s.autoscaler.reactive_interval_s);
        s.autoscaler.idle_timeout_s = a.value("idle_timeout_s", s.autoscaler.idle_timeout_s);
        s.autoscaler.utilization_trigger =
            a.value("utilization_trigger", s.autoscaler.utilization_trigger);
        s.autoscaler.slo_violation_trigger =
            a.value("slo_violation_trigger", s.autoscaler.slo_violation_trigger);
        s.autoscaler.importance_window_s =
            a.value("importance_window_s", s.autoscaler.importance_window_s);
        s.autoscaler.uniform_weights = a.value("uniform_weights", false);
    }
    if (j.contains("market")) {
        const json& m = j["market"];
        reject_unknown(m,
                       {"use_spot", "bid_fraction", "failure_prob", "check_interval_s",
                        "notice_s", "constant_fraction", "price_traces"},
                       "market");
        s.market.use_spot = m.value("use_spot", false);
        s.market.bid_fraction = m.value("bid_fraction", s.market.bid_fraction);
        s.market.failure_prob = m.value("failure_prob", s.market.failure_prob);
        s.market.check_interval_s = m.value("check_interval_s", s.market.check_interval_s);
        s.market.notice_s = m.value("notice_s", s.market.notice_s);
        s.market.constant_fraction = m.value("constant_fraction", s.market.constant_fraction);
        if (m.contains("price_traces"))
            for (const auto& [type, file] : m["price_traces"].items())
                s.market.price_trace_files[type] = resolve(base, file.get<std::string>());
    }
    s.market.seed = s.seed;
    if (j.contains("latency")) {
        const json& l = j["latency"];
        reject_unknown(l, {"network_min_ms", "network_max_ms", "launch_min_s", "launch_max_s"},
                       "latency");
        s.latency.network_min_ms = l.value("network_min_ms", s.latency.network_min_ms);
        s.latency.network_max_ms = l.value("network_max_ms", s.latency.network_max_ms);
        s.latency.launch_min_s = l.value("launch_min_s", s.latency.launch_min_s);
        s.latency.launch_max_s = l.value("launch_max_s", s.latency.launch_max_s);
    }
    if (j.contains("metrics")) {
        const json& m = j["metrics"];
        reject_unknown(m, {"slo_latency_ms", "accuracy_window", "timeseries_interval_s"},
                       "metrics");
        s.metrics.slo_latency_ms = m.value("slo_latency_ms", s.metrics.slo_latency_ms);
        s.metrics.accuracy_window = m.value("accuracy_window", s.metrics.accuracy_window);
        s.metrics.timeseries_interval_s =
            m.value("timeseries_interval_s", s.metrics.timeseries_interval_s);
    }

    s.validate();
    return s;
}

}  // namespace esim

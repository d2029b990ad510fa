#include "esim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace esim {

Percentiles compute_percentiles(std::vector<double> samples) {
    Percentiles p;
    if (samples.empty()) return p;
    std::sort(samples.begin(), samples.end());
    auto nearest_rank = [&](double pct) {
        size_t rank = static_cast<size_t>(
            std::ceil(pct / 100.0 * static_cast<double>(samples.size())));
        if (rank == 0) rank = 1;
        return samples[rank - 1];
    };
    p.min = samples.front();
    p.p25 = nearest_rank(25);
    p.p50 = nearest_rank(50);
    p.p75 = nearest_rank(75);
    p.p90 = nearest_rank(90);
    p.p95 = nearest_rank(95);
    p.p99 = nearest_rank(99);
    p.max = samples.back();
    double sum = 0;
    for (double s : samples) sum += s;
    p.mean = sum / static_cast<double>(samples.size());
    return p;
}

MetricsCollector::MetricsCollector(MetricsConfig cfg) : cfg_(cfg) {
    if (cfg_.accuracy_window < 1) throw ConfigError("metrics: accuracy window < 1");
    if (!(cfg_.slo_latency_ms > 0)) throw ConfigError("metrics: SLO latency <= 0");
}

void MetricsCollector::record_completion(const CompletionRecord& rec) {
    completions_.push_back(rec);
    ConstraintSummary& s = per_key_[rec.constraint_key];
    s.queries++;
    s.accuracy_target = rec.accuracy_target;
    if (rec.correct) s.correct++;
    if (rec.failed) s.failed++;

    auto& win = windows_[rec.constraint_key];
    win.push_back(rec.correct);
    if (win.size() > static_cast<size_t>(cfg_.accuracy_window)) win.pop_front();
    if (win.size() == static_cast<size_t>(cfg_.accuracy_window)) {
        s.window_samples++;
        long ok = static_cast<long>(std::count(win.begin(), win.end(), true));
        double frac = static_cast<double>(ok) / static_cast<double>(win.size());
        if (frac >= rec.accuracy_target) s.accuracy_met++;
    }
}

void MetricsCollector::record_point(double t, const std::string& metric, const std::string& key,
                                    double value) {
    timeseries_.push_back({t, metric, key, value});
}

void MetricsCollector::record_scale_action(const ScaleAction& a, const std::string& type_name) {
    timeseries_.push_back({a.t, "scaling_action", type_name + ":" + a.reason + ":" + a.action,
                           static_cast<double>(a.count)});
}

double MetricsCollector::slo_violation_fraction() const {
    if (completions_.empty()) return 0;
    long v = 0;
    for (const auto& r : completions_)
        if (r.failed || r.latency_ms > cfg_.slo_latency_ms) ++v;
    return static_cast<double>(v) / static_cast<double>(completions_.size());
}

double MetricsCollector::slo_violation_fraction_since(double t0) const {
    long n = 0, v = 0;
    for (auto it = completions_.rbegin(); it != completions_.rend(); ++it) {
        if (it->completion_s < t0) break;
        ++n;
        if (it->failed || it->latency_ms > cfg_.slo_latency_ms) ++v;
    }
    if (n == 0) return 0;
    return static_cast<double>(v) / static_cast<double>(n);
}

double MetricsCollector::overall_accuracy() const {
    if (completions_.empty()) return 0;
    long c = 0;
    for (const auto& r : completions_)
        if (r.correct) ++c;
    return static_cast<double>(c) / static_cast<double>(completions_.size());
}

double MetricsCollector::mean_ensemble_size() const {
    if (completions_.empty()) return 0;
    double sum = 0;
    for (const auto& r : completions_) sum += r.ensemble_size;
    return sum / static_cast<double>(completions_.size());
}

long MetricsCollector::failed_queries() const {
    long f = 0;
    for (const auto& r : completions_)
        if (r.failed) ++f;
    return f;
}

Percentiles MetricsCollector::latency_percentiles() const {
    std::vector<double> lat;
    lat.reserve(completions_.size());
    for (const auto& r : completions_)
        if (!r.failed) lat.push_back(r.latency_ms);
    return compute_percentiles(std::move(lat));
}

namespace {

double round6(double v) { return std::round(v * 1e6) / 1e6; }

}  // namespace

void emit_reports(const std::string& out_dir, const MetricsCollector& metrics,
                  const RunArtifacts& artifacts) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    char buf[512];

    {
        std::ofstream out(fs::path(out_dir) / "latency.csv", std::ios::binary);
        out << "query_id,arrival_s,completion_s,latency_ms,constraint,correct,failed,"
               "ensemble_size,votes_cast\n";
        for (const auto& r : metrics.completions()) {
            std::snprintf(buf, sizeof(buf), "%llu,%.6f,%.6f,%.3f,%s,%d,%d,%d,%d\n",
                          static_cast<unsigned long long>(r.query_id), r.arrival_s,
                          r.completion_s, r.latency_ms, r.constraint_key.c_str(),
                          r.correct ? 1 : 0, r.failed ? 1 : 0, r.ensemble_size, r.votes_cast);
            out << buf;
        }
    }

    {
        std::ofstream out(fs::path(out_dir) / "timeseries.csv", std::ios::binary);
        out << "t_s,metric,key,value\n";
        for (const auto& p : metrics.timeseries()) {
            std::snprintf(buf, sizeof(buf), "%.3f,%s,%s,%.6f\n", p.t, p.metric.c_str(),
                          p.key.c_str(), p.value);
            out << buf;
        }
    }

    {
        std::ofstream out(fs::path(out_dir) / "cost.csv", std::ios::binary);
        out << "instance_id,type,pool,mode,launched_at,terminated_at,billed_seconds,cost_usd\n";
        for (const auto& c : artifacts.cost_lines) {
            std::snprintf(buf, sizeof(buf), "%d,%s,%d,%s,%.3f,%.3f,%ld,%.6f\n", c.instance_id,
                          c.type_name.c_str(), c.pool, c.pricing_mode.c_str(), c.launched_at,
                          c.terminated_at, c.billed_seconds, c.cost);
            out << buf;
        }
    }

    nlohmann::json j;
    j["duration_s"] = round6(artifacts.duration_s);
    j["generated_queries"] = artifacts.generated_queries;
    j["completed_queries"] = metrics.total_queries();
    j["failed_queries"] = metrics.failed_queries();
    j["overall_accuracy"] = round6(metrics.overall_accuracy());
    j["mean_ensemble_size"] = round6(metrics.mean_ensemble_size());
    j["slo_violation_fraction"] = round6(metrics.slo_violation_fraction());
    Percentiles p = metrics.latency_percentiles();
    j["latency_ms"] = {{"min", round6(p.min)},   {"p25", round6(p.p25)}, {"p50", round6(p.p50)},
                       {"p75", round6(p.p75)},   {"p90", round6(p.p90)}, {"p95", round6(p.p95)},
                       {"p99", round6(p.p99)},   {"max", round6(p.max)}, {"mean", round6(p.mean)}};
    nlohmann::json per;
    for (const auto& [key, s] : metrics.per_constraint()) {
        nlohmann::json e;
        e["queries"] = s.queries;
        e["correct"] = s.correct;
        e["failed"] = s.failed;
        e["accuracy"] =
            round6(s.queries ? static_cast<double>(s.correct) / s.queries : 0.0);
        e["accuracy_target"] = round6(s.accuracy_target);
        e["accuracy_met_fraction"] =
            round6(s.window_samples ? static_cast<double>(s.accuracy_met) / s.window_samples
                                    : 0.0);
        e["window_samples"] = s.window_samples;
        per[key] = e;
    }
    j["per_constraint"] = per;
    j["cost"] = {{"total_usd", round6(artifacts.total_cost)},
                 {"on_demand_usd", round6(artifacts.od_cost)},
                 {"spot_usd", round6(artifacts.spot_cost)}};
    nlohmann::json cfg;
    for (const auto& [k, v] : artifacts.config_echo) cfg[k] = v;
    j["config"] = cfg;

    std::ofstream out(fs::path(out_dir) / "summary.json", std::ios::binary);
    out << j.dump(2) << "\n";
}

}  // namespace esim

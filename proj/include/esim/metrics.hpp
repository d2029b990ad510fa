#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "esim/ensemble.hpp"
#include "esim/resource.hpp"

namespace esim {

struct CompletionRecord {
    uint64_t query_id = 0;
    double arrival_s = 0;
    double completion_s = 0;
    double latency_ms = 0;  // end-to-end, network included
    int true_class = 0;
    int predicted_class = -1;
    bool correct = false;
    bool failed = false;  // no model produced a vote
    int ensemble_size = 0;
    int votes_cast = 0;
    std::string constraint_key;
    double accuracy_target = 0;
};

struct Percentiles {
    double min = 0, p25 = 0, p50 = 0, p75 = 0, p90 = 0, p95 = 0, p99 = 0, max = 0, mean = 0;
};

// Nearest-rank percentile over a copy of the samples.
Percentiles compute_percentiles(std::vector<double> samples);

struct TimeseriesPoint {
    double t = 0;
    std::string metric;
    std::string key;
    double value = 0;
};

struct ConstraintSummary {
    long queries = 0;
    long correct = 0;
    long failed = 0;
    long accuracy_met = 0;    // completions whose trailing window met the target
    long window_samples = 0;  // completions with a full window behind them
    double accuracy_target = 0;
};

struct MetricsConfig {
    double slo_latency_ms = 700.0;
    int accuracy_window = 200;  // trailing completions per constraint key
    double timeseries_interval_s = 10.0;
};

class MetricsCollector {
public:
    explicit MetricsCollector(MetricsConfig cfg = {});

    const MetricsConfig& config() const { return cfg_; }

    void record_completion(const CompletionRecord& rec);
    void record_point(double t, const std::string& metric, const std::string& key, double value);
    void record_scale_action(const ScaleAction& a, const std::string& type_name);

    long total_queries() const { return static_cast<long>(completions_.size()); }
    const std::vector<CompletionRecord>& completions() const { return completions_; }
    const std::vector<TimeseriesPoint>& timeseries() const { return timeseries_; }
    const std::map<std::string, ConstraintSummary>& per_constraint() const { return per_key_; }

    double slo_violation_fraction() const;  // over all completions
    // Violation fraction over completions since t0 (for the reactive trigger).
    double slo_violation_fraction_since(double t0) const;
    double overall_accuracy() const;
    double mean_ensemble_size() const;
    long failed_queries() const;

    Percentiles latency_percentiles() const;

private:
    MetricsConfig cfg_;
    std::vector<CompletionRecord> completions_;
    std::vector<TimeseriesPoint> timeseries_;
    std::map<std::string, ConstraintSummary> per_key_;
    std::map<std::string, std::deque<bool>> windows_;  // per key trailing correctness
};

struct CostLine {
    int instance_id = -1;
    std::string type_name;
    int pool = -1;
    std::string pricing_mode;
    double launched_at = 0;
    double terminated_at = 0;
    long billed_seconds = 0;
    double cost = 0;
};

struct RunArtifacts {
    std::map<std::string, std::string> config_echo;  // flattened scenario settings
    std::vector<CostLine> cost_lines;
    double total_cost = 0;
    double od_cost = 0;
    double spot_cost = 0;
    double duration_s = 0;
    long generated_queries = 0;
};

// Writes summary.json, latency.csv, timeseries.csv and cost.csv under
// out_dir. All floats use fixed formats so reruns are byte-identical.
void emit_reports(const std::string& out_dir, const MetricsCollector& metrics,
                  const RunArtifacts& artifacts);

}  // namespace esim
